use serde::{Deserialize, Serialize};

use super::{Hyperparameters, MargotError, Variant, VariableMap};
use crate::bnb::MixedIntegerQp;
use crate::dataset::Dataset;
use crate::qp::{QuadraticProgram, SparseMatrix};

/// Closed-form problem sizes for a variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub continuous_vars: usize,
    pub binary_vars: usize,
    pub routing_rows: usize,
    pub margin_rows: usize,
    pub assignment_rows: usize,
    pub linking_rows: usize,
    pub budget_rows: usize,
    pub excess_rows: usize,
}

impl Dimensions {
    pub fn total_vars(&self) -> usize {
        self.continuous_vars + self.binary_vars
    }

    pub fn total_rows(&self) -> usize {
        self.routing_rows
            + self.margin_rows
            + self.assignment_rows
            + self.linking_rows
            + self.budget_rows
            + self.excess_rows
    }
}

/// Sizes of the model for depth `depth`, `n` features and `m` samples.
pub fn dimensions(variant: Variant, depth: usize, n: usize, m: usize) -> Dimensions {
    let map = VariableMap::new(variant, depth, n, m);
    let binary = map.binary_vars().len();
    Dimensions {
        continuous_vars: map.num_vars - binary,
        binary_vars: binary,
        routing_rows: map.routing_rows.len(),
        margin_rows: map.margin_rows.len(),
        assignment_rows: map.assignment_rows.len(),
        linking_rows: map.linking_rows.len(),
        budget_rows: map.budget_rows.len(),
        excess_rows: map.excess_rows.len(),
    }
}

pub fn build_margot(
    data: &Dataset,
    hp: &Hyperparameters,
) -> Result<(MixedIntegerQp, VariableMap), MargotError> {
    build(data, hp, Variant::Margot)
}

pub fn build_hfs(
    data: &Dataset,
    hp: &Hyperparameters,
) -> Result<(MixedIntegerQp, VariableMap), MargotError> {
    build(data, hp, Variant::Hfs)
}

pub fn build_sfs(
    data: &Dataset,
    hp: &Hyperparameters,
) -> Result<(MixedIntegerQp, VariableMap), MargotError> {
    build(data, hp, Variant::Sfs)
}

pub fn build(
    data: &Dataset,
    hp: &Hyperparameters,
    variant: Variant,
) -> Result<(MixedIntegerQp, VariableMap), MargotError> {
    let n = data.num_features();
    let m = data.num_samples();
    hp.validate(variant, n)?;
    let topo = hp.topology()?;
    let map = VariableMap::new(variant, hp.depth, n, m);
    let nl0 = topo.last_level_nodes().start;
    let mut qp = QuadraticProgram::new(map.num_vars);
    qp.p = SparseMatrix::zeros(map.num_vars, map.num_vars);

    for t in topo.branch_nodes() {
        for j in 0..n {
            qp.p.push(map.w(t, j), map.w(t, j), 1.0);
        }
        for i in 0..m {
            qp.q[map.xi(t, i)] = hp.c[t];
            qp.lb[map.xi(t, i)] = 0.0;
        }
    }
    for k in map.binary_vars() {
        qp.lb[k] = 0.0;
        qp.ub[k] = 1.0;
    }

    let hyperplane = |t: usize, i: usize, scale: f64| -> Vec<(usize, f64)> {
        let mut row: Vec<(usize, f64)> = (0..n)
            .map(|j| (map.w(t, j), scale * data.features[i][j]))
            .collect();
        row.push((map.b(t), scale));
        row
    };

    // y(wᵀx + b) + ξ − M_ξ Σ_{ℓ∈𝒮″(t)} z ≥ 1 − M_ξ
    for t in topo.branch_nodes() {
        for i in 0..m {
            let mut row = hyperplane(t, i, data.labels[i]);
            row.push((map.xi(t, i), 1.0));
            for l in topo.last_level_under(t) {
                row.push((map.z(i, l - nl0), -hp.m_xi));
            }
            qp.add_row(&row, 1.0 - hp.m_xi, f64::INFINITY);
        }
    }
    debug_assert_eq!(qp.num_rows(), map.margin_rows.end);

    // wᵀx + b − M_H Σ_{𝒮″_R(t)} z ≥ −M_H  and  wᵀx + b + M_H Σ_{𝒮″_L(t)} z ≤ M_H − ε
    for t in topo.upper_branch_nodes() {
        for i in 0..m {
            let mut right = hyperplane(t, i, 1.0);
            for l in topo.last_level_right(t) {
                right.push((map.z(i, l - nl0), -hp.m_h));
            }
            qp.add_row(&right, -hp.m_h, f64::INFINITY);
            let mut left = hyperplane(t, i, 1.0);
            for l in topo.last_level_left(t) {
                left.push((map.z(i, l - nl0), hp.m_h));
            }
            qp.add_row(&left, f64::NEG_INFINITY, hp.m_h - hp.epsilon);
        }
    }
    debug_assert_eq!(qp.num_rows(), map.routing_rows.end);

    for i in 0..m {
        let row: Vec<(usize, f64)> = (0..map.num_last_level()).map(|l| (map.z(i, l), 1.0)).collect();
        qp.add_row(&row, 1.0, 1.0);
    }

    if variant != Variant::Margot {
        // −M_w s ≤ w ≤ M_w s
        for t in topo.branch_nodes() {
            for j in 0..n {
                let s = map.s(t, j).expect("feature-selection variant");
                qp.add_row(&[(map.w(t, j), 1.0), (s, -hp.m_w)], f64::NEG_INFINITY, 0.0);
                qp.add_row(&[(map.w(t, j), 1.0), (s, hp.m_w)], 0.0, f64::INFINITY);
            }
        }
    }
    let budgets = hp.budgets.as_deref().unwrap_or_default();
    if variant == Variant::Hfs {
        for t in topo.branch_nodes() {
            let row: Vec<(usize, f64)> = (0..n).map(|j| (map.s(t, j).unwrap(), 1.0)).collect();
            qp.add_row(&row, f64::NEG_INFINITY, budgets[t] as f64);
        }
    }
    if variant == Variant::Sfs {
        let alpha = hp.alpha.expect("validated");
        for t in topo.branch_nodes() {
            let u = map.u(t).unwrap();
            qp.q[u] = alpha;
            qp.lb[u] = 0.0;
            // u_t − Σ_j s_{t,j} ≥ −B_t
            let mut row: Vec<(usize, f64)> = (0..n).map(|j| (map.s(t, j).unwrap(), -1.0)).collect();
            row.push((u, 1.0));
            qp.add_row(&row, -(budgets[t] as f64), f64::INFINITY);
        }
    }
    debug_assert_eq!(qp.num_rows(), map.num_rows());
    for w in &map.warnings {
        log::warn!("{w}");
    }
    let binaries = map.binary_vars();
    Ok((MixedIntegerQp::new(qp, binaries)?, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(m: usize, n: usize) -> Dataset {
        Dataset::new(
            (0..m).map(|i| (0..n).map(|j| ((i * 7 + j * 3) % 10) as f64 / 10.0).collect()).collect(),
            (0..m).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect(),
            (0..n).map(|j| format!("f{j}")).collect(),
            "toy",
        )
        .unwrap()
    }

    #[test]
    fn depth_two_sizes() {
        let d = dimensions(Variant::Margot, 2, 2, 10);
        assert_eq!(d.continuous_vars, 39);
        assert_eq!(d.binary_vars, 20);
        assert_eq!(d.routing_rows, 20);
        assert_eq!(d.margin_rows, 30);
        assert_eq!(d.assignment_rows, 10);
        let (prob, map) = build_margot(&toy(10, 2), &Hyperparameters::uniform(2, 1.0)).unwrap();
        assert_eq!(prob.num_vars(), 59);
        assert_eq!(prob.binary_vars.len(), 20);
        assert_eq!(prob.base.num_rows(), 60);
        assert_eq!(map.num_rows(), 60);
    }

    #[test]
    fn depth_one_has_no_routing() {
        let (prob, map) = build_margot(&toy(5, 2), &Hyperparameters::uniform(1, 1.0)).unwrap();
        assert!(map.routing_rows.is_empty());
        assert_eq!(prob.binary_vars.len(), 5);
    }

    #[test]
    fn variant_blocks() {
        let hp = Hyperparameters::uniform(2, 1.0).with_budgets(vec![1, 2, 2]);
        let (prob, map) = build_hfs(&toy(6, 3), &hp).unwrap();
        assert_eq!(prob.binary_vars.len(), 6 * 2 + 3 * 3);
        assert_eq!(map.budget_rows.len(), 3);
        assert_eq!(map.linking_rows.len(), 2 * 3 * 3);
        let (prob, map) = build_sfs(&toy(6, 3), &hp.clone().with_alpha(2.0)).unwrap();
        assert_eq!(map.excess_rows.len(), 3);
        assert_eq!(prob.base.q[map.u(1).unwrap()], 2.0);
        assert!(build_sfs(&toy(6, 3), &hp).is_err());
        assert!(build_hfs(&toy(6, 3), &Hyperparameters::uniform(2, 1.0)).is_err());
    }

    #[test]
    fn variable_names() {
        let map = VariableMap::new(Variant::Sfs, 2, 2, 3);
        assert_eq!(map.name(map.w(1, 1)), "w[1,1]");
        assert_eq!(map.name(map.b(2)), "b[2]");
        assert_eq!(map.name(map.xi(2, 0)), "xi[2,0]");
        assert_eq!(map.name(map.z(2, 1)), "z[2,2]");
        assert_eq!(map.name(map.s(0, 1).unwrap()), "s[0,1]");
        assert_eq!(map.name(map.u(2).unwrap()), "u[2]");
    }
}
