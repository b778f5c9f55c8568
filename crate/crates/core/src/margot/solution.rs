use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Hyperparameters, MargotError, VariableMap};
use crate::bnb::MixedIntegerQp;
use crate::dataset::Dataset;
use crate::tree::{TreeClassifier, TreeTopology};

/// `|w_{t,j}|` above this counts as a used feature.
pub const FEATURE_THRESHOLD: f64 = 1e-8;
/// A node with `‖w_t‖∞` at or below this is treated as pruned.
pub const PRUNED_THRESHOLD: f64 = 1e-8;
/// Largest routing violation [`extract_tree`] repairs by shifting `b_t`.
const SNAP_LIMIT: f64 = 1e-5;
const Z_TOL: f64 = 1e-5;

/// The variable blocks of a MARGOT-family solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSolution {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// `xi[t][i]`
    pub xi: Vec<Vec<f64>>,
    /// `z[i][l]`, `l` indexing the last level left to right.
    pub z: Vec<Vec<f64>>,
    pub s: Option<Vec<Vec<f64>>>,
    pub u: Option<Vec<f64>>,
    pub objective: f64,
}

impl ModelSolution {
    pub fn from_vector(
        map: &VariableMap,
        hp: &Hyperparameters,
        x: &[f64],
    ) -> Result<Self, MargotError> {
        if x.len() != map.num_vars {
            return Err(MargotError::SolutionDimension {
                expected: map.num_vars,
                got: x.len(),
            });
        }
        let nb = map.num_branch_nodes();
        let (n, m) = (map.num_features, map.num_samples);
        let mut sol = ModelSolution {
            w: (0..nb).map(|t| (0..n).map(|j| x[map.w(t, j)]).collect()).collect(),
            b: (0..nb).map(|t| x[map.b(t)]).collect(),
            xi: (0..nb).map(|t| (0..m).map(|i| x[map.xi(t, i)]).collect()).collect(),
            z: (0..m)
                .map(|i| (0..map.num_last_level()).map(|l| x[map.z(i, l)]).collect())
                .collect(),
            s: map.s.map(|_| {
                (0..nb)
                    .map(|t| (0..n).map(|j| x[map.s(t, j).unwrap()]).collect())
                    .collect()
            }),
            u: map.u.map(|_| (0..nb).map(|t| x[map.u(t).unwrap()]).collect()),
            objective: 0.0,
        };
        sol.objective = sol.compute_objective(hp);
        Ok(sol)
    }

    pub fn to_vector(&self, map: &VariableMap) -> Vec<f64> {
        let mut x = vec![0.0; map.num_vars];
        for (t, wt) in self.w.iter().enumerate() {
            for (j, &v) in wt.iter().enumerate() {
                x[map.w(t, j)] = v;
            }
            x[map.b(t)] = self.b[t];
            for (i, &v) in self.xi[t].iter().enumerate() {
                x[map.xi(t, i)] = v;
            }
        }
        for (i, zi) in self.z.iter().enumerate() {
            for (l, &v) in zi.iter().enumerate() {
                x[map.z(i, l)] = v;
            }
        }
        if let Some(s) = &self.s {
            for (t, st) in s.iter().enumerate() {
                for (j, &v) in st.iter().enumerate() {
                    x[map.s(t, j).unwrap()] = v;
                }
            }
        }
        if let Some(u) = &self.u {
            for (t, &v) in u.iter().enumerate() {
                x[map.u(t).unwrap()] = v;
            }
        }
        x
    }

    /// `Σ_t ½‖w_t‖² + C_t Σ_i ξ_{t,i}` plus `α Σ_t u_t` when present.
    pub fn compute_objective(&self, hp: &Hyperparameters) -> f64 {
        let mut value = 0.0;
        for (t, wt) in self.w.iter().enumerate() {
            value += 0.5 * wt.iter().map(|v| v * v).sum::<f64>();
            value += hp.c[t] * self.xi[t].iter().sum::<f64>();
        }
        if let (Some(u), Some(alpha)) = (&self.u, hp.alpha) {
            value += alpha * u.iter().sum::<f64>();
        }
        value
    }

    /// Last-level node (tree index) sample `i` is assigned to, if its `z`
    /// row is one-hot within tolerance.
    pub fn assigned_node(&self, i: usize, depth: usize) -> Option<usize> {
        let row = &self.z[i];
        let hot: Vec<usize> = (0..row.len()).filter(|&l| row[l] > 0.5).collect();
        let one_hot = hot.len() == 1
            && row
                .iter()
                .enumerate()
                .all(|(l, &v)| (v - if l == hot[0] { 1.0 } else { 0.0 }).abs() <= Z_TOL);
        one_hot.then(|| (1 << (depth - 1)) - 1 + hot[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintFamily {
    Margin,
    Routing,
    Assignment,
    Linking,
    Budget,
    Excess,
    /// Variable bounds, including `ξ ≥ 0` and `u ≥ 0`.
    Bounds,
    Integrality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Worst violation per constraint family present in the model.
    pub worst: Vec<(ConstraintFamily, f64)>,
    pub feas_tol: f64,
    pub int_tol: f64,
}

impl FeasibilityReport {
    pub fn violation(&self, family: ConstraintFamily) -> f64 {
        self.worst
            .iter()
            .find(|(f, _)| *f == family)
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn is_feasible(&self) -> bool {
        self.worst.iter().all(|&(f, v)| {
            v <= if f == ConstraintFamily::Integrality {
                self.int_tol
            } else {
                self.feas_tol
            }
        })
    }
}

/// Evaluates every row of `prob` at `x` and reports the worst violation by
/// constraint family.
pub fn check_feasible(
    prob: &MixedIntegerQp,
    map: &VariableMap,
    x: &[f64],
    feas_tol: f64,
    int_tol: f64,
) -> Result<FeasibilityReport, MargotError> {
    if x.len() != prob.num_vars() {
        return Err(MargotError::SolutionDimension {
            expected: prob.num_vars(),
            got: x.len(),
        });
    }
    let activity = prob.base.a.mul_vec(x);
    let row_violation = |r: usize| {
        let lo = prob.base.lower[r] - activity[r];
        let hi = activity[r] - prob.base.upper[r];
        let v = lo.max(hi).max(0.0);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let worst_of = |range: std::ops::Range<usize>| range.map(row_violation).fold(0.0, f64::max);
    let mut worst = vec![
        (ConstraintFamily::Margin, worst_of(map.margin_rows.clone())),
        (ConstraintFamily::Routing, worst_of(map.routing_rows.clone())),
        (ConstraintFamily::Assignment, worst_of(map.assignment_rows.clone())),
    ];
    if !map.linking_rows.is_empty() {
        worst.push((ConstraintFamily::Linking, worst_of(map.linking_rows.clone())));
    }
    if !map.budget_rows.is_empty() {
        worst.push((ConstraintFamily::Budget, worst_of(map.budget_rows.clone())));
    }
    if !map.excess_rows.is_empty() {
        worst.push((ConstraintFamily::Excess, worst_of(map.excess_rows.clone())));
    }
    let bounds = x
        .iter()
        .zip(prob.base.lb.iter().zip(&prob.base.ub))
        .map(|(&v, (&lo, &hi))| {
            let e = (lo - v).max(v - hi).max(0.0);
            if e.is_nan() {
                f64::INFINITY
            } else {
                e
            }
        })
        .fold(0.0, f64::max);
    worst.push((ConstraintFamily::Bounds, bounds));
    let integrality = prob
        .binary_vars
        .iter()
        .map(|&j| {
            let e = (x[j] - x[j].round()).abs();
            if e.is_nan() {
                f64::INFINITY
            } else {
                e
            }
        })
        .fold(0.0, f64::max);
    worst.push((ConstraintFamily::Integrality, integrality));
    Ok(FeasibilityReport {
        worst,
        feas_tol,
        int_tol,
    })
}

fn hyperplane(w: &[f64], b: f64, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b
}

/// Builds the classifier of a solution.
///
/// Pruned nodes get `w_t = 0` exactly. At the last level their intercept is
/// the majority label of the samples they receive (ties and empty nodes give
/// `+1`). Above the last level it is `±1` on the side the assignment sends
/// the node's samples to. When an active hyperplane leaves an assigned
/// sample within [`SNAP_LIMIT`] of the wrong side, `b_t` is shifted just
/// enough for the tree to reproduce the assignment.
pub fn extract_tree(
    sol: &ModelSolution,
    map: &VariableMap,
    data: &Dataset,
) -> Result<TreeClassifier, MargotError> {
    let topo = TreeTopology::new(map.depth)?;
    let m = data.num_samples();
    if sol.z.len() != m || data.num_features() != map.num_features {
        return Err(MargotError::SolutionDimension {
            expected: map.num_samples,
            got: m,
        });
    }
    let assigned: Vec<usize> = (0..m)
        .map(|i| {
            sol.assigned_node(i, map.depth).ok_or_else(|| {
                MargotError::InfeasibleSolution(format!("z row of sample {i} is not one-hot"))
            })
        })
        .collect::<Result<_, _>>()?;
    let mut weights = sol.w.clone();
    let mut intercepts = sol.b.clone();

    for t in topo.branch_nodes() {
        let under = topo.last_level_under(t);
        let members: Vec<usize> = (0..m).filter(|&i| under.contains(&assigned[i])).collect();
        let goes_right = |i: usize| {
            !topo.is_last_level(t) && topo.last_level_right(t).contains(&assigned[i])
        };
        let pruned = weights[t].iter().all(|v| v.abs() <= PRUNED_THRESHOLD);
        if pruned {
            weights[t].iter_mut().for_each(|v| *v = 0.0);
            intercepts[t] = if topo.is_last_level(t) {
                let positives = members.iter().filter(|&&i| data.labels[i] > 0.0).count();
                if 2 * positives >= members.len() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                match members.first() {
                    None => 1.0,
                    Some(&i) => {
                        if members.iter().any(|&k| goes_right(k) != goes_right(i)) {
                            return Err(MargotError::InfeasibleSolution(format!(
                                "pruned node {t} splits its samples"
                            )));
                        }
                        if goes_right(i) {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                }
            };
            continue;
        }
        if topo.is_last_level(t) {
            continue;
        }
        let w = &weights[t];
        let mut b = intercepts[t];
        let lowest_right = members
            .iter()
            .filter(|&&i| goes_right(i))
            .map(|&i| hyperplane(w, b, &data.features[i]))
            .fold(f64::INFINITY, f64::min);
        if lowest_right < 0.0 {
            if -lowest_right > SNAP_LIMIT {
                return Err(MargotError::InfeasibleSolution(format!(
                    "node {t} routes an assigned-right sample left by {:e}",
                    -lowest_right
                )));
            }
            b -= lowest_right;
            while members
                .iter()
                .any(|&i| goes_right(i) && hyperplane(w, b, &data.features[i]) < 0.0)
            {
                b = b.next_up();
            }
        }
        let highest_left = members
            .iter()
            .filter(|&&i| !goes_right(i))
            .map(|&i| hyperplane(w, b, &data.features[i]))
            .fold(f64::NEG_INFINITY, f64::max);
        if highest_left >= 0.0 {
            return Err(MargotError::InfeasibleSolution(format!(
                "node {t} routes an assigned-left sample right"
            )));
        }
        intercepts[t] = b;
    }
    Ok(TreeClassifier::new(
        topo,
        weights,
        intercepts,
        data.feature_names.clone(),
    )?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureReport {
    /// `|F|`
    pub total: usize,
    /// `|F_t|` per branch node.
    pub per_node: Vec<usize>,
    /// Names of the features in `F`, in column order.
    pub used: Vec<String>,
}

impl FeatureReport {
    pub fn sum_per_node(&self) -> usize {
        self.per_node.iter().sum()
    }
}

/// Features with `|w_{t,j}| > 1e−8` per node and over the whole tree.
pub fn feature_report(clf: &TreeClassifier) -> FeatureReport {
    let mut union = BTreeSet::new();
    let per_node = clf
        .topology()
        .branch_nodes()
        .map(|t| {
            let used: Vec<usize> = (0..clf.num_features())
                .filter(|&j| clf.weights(t)[j].abs() > FEATURE_THRESHOLD)
                .collect();
            union.extend(used.iter().copied());
            used.len()
        })
        .collect();
    FeatureReport {
        total: union.len(),
        per_node,
        used: union
            .into_iter()
            .map(|j| clf.feature_names()[j].clone())
            .collect(),
    }
}

/// Lists constraints that sit at their big-M bound, meaning the constant may
/// be too small to deactivate them.
pub fn big_m_report(sol: &ModelSolution, hp: &Hyperparameters, data: &Dataset) -> Vec<String> {
    const SLACK: f64 = 1e-6;
    let Ok(topo) = TreeTopology::new(hp.depth) else {
        return vec!["invalid depth".into()];
    };
    let first = topo.last_level_nodes().start;
    let mut out = Vec::new();
    let z_sum = |i: usize, nodes: std::ops::Range<usize>| -> f64 {
        nodes.map(|l| sol.z[i][l - first]).sum()
    };
    for t in topo.branch_nodes() {
        for (i, x) in data.features.iter().enumerate() {
            let h = hyperplane(&sol.w[t], sol.b[t], x);
            if z_sum(i, topo.last_level_under(t)) < 0.5
                && data.labels[i] * h + sol.xi[t][i] - 1.0 + hp.m_xi <= SLACK
            {
                out.push(format!("margin constraint of node {t}, sample {i} is at -M_xi"));
            }
            if !topo.is_last_level(t) {
                if z_sum(i, topo.last_level_right(t)) < 0.5 && h + hp.m_h <= SLACK {
                    out.push(format!("right routing of node {t}, sample {i} is at -M_H"));
                }
                if z_sum(i, topo.last_level_left(t)) < 0.5 && hp.m_h - hp.epsilon - h <= SLACK {
                    out.push(format!("left routing of node {t}, sample {i} is at M_H"));
                }
            }
        }
        if sol.s.is_some() {
            for (j, &w) in sol.w[t].iter().enumerate() {
                if w.abs() >= hp.m_w - SLACK {
                    out.push(format!("|w[{t},{j}]| reaches M_w"));
                }
            }
        }
    }
    out
}
