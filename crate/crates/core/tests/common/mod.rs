#![allow(dead_code)]

use margot::bnb::MixedIntegerQp;
use margot::dataset::Dataset;
use margot::qp::{solve_qp, QpSettings, QpStatus, QuadraticProgram};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// `m` points in the unit box with labels from a random rule plus noise,
/// both classes present when `m ≥ 2`.
pub fn random_dataset<R: Rng>(rng: &mut R, m: usize, n: usize) -> Dataset {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let features: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let mut labels: Vec<f64> = features
        .iter()
        .map(|x| {
            let h: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.4..0.4);
            if h >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    if m >= 2 && labels.iter().all(|&y| y == labels[0]) {
        labels[0] = -labels[0];
    }
    Dataset::new(
        features,
        labels,
        (0..n).map(|j| format!("f{j}")).collect(),
        "random",
    )
    .unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Rows whose every variable is binary, checked as soon as they are fully
/// fixed.
fn binary_rows(prob: &MixedIntegerQp) -> Vec<(usize, Vec<(usize, f64)>, f64, f64)> {
    let is_bin: Vec<bool> = {
        let mut v = vec![false; prob.num_vars()];
        prob.binary_vars.iter().for_each(|&j| v[j] = true);
        v
    };
    let position: std::collections::HashMap<usize, usize> =
        prob.binary_vars.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    prob.base
        .a
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(_, row)| !row.is_empty() && row.iter().all(|&(j, _)| is_bin[j]))
        .map(|(r, row)| {
            let last = row.iter().map(|(j, _)| position[j]).max().unwrap();
            let coefs = row.iter().map(|&(j, a)| (position[&j], a)).collect();
            (last, coefs, prob.base.lower[r], prob.base.upper[r])
        })
        .collect()
}

/// Minimum over every 0/1 assignment of the binaries, each completed by a
/// QP solve. Assignments that violate a row made only of binaries are
/// skipped before solving. Returns `(objective, number of QPs solved)`.
pub fn enumerate_miqp(prob: &MixedIntegerQp) -> (Option<f64>, usize) {
    let k = prob.binary_vars.len();
    let rows = binary_rows(prob);
    let settings = QpSettings {
        validate_psd: false,
        ..Default::default()
    };
    let mut values = vec![0.0; k];
    let mut best: Option<f64> = None;
    let mut solved = 0;

    fn recurse(
        depth: usize,
        values: &mut Vec<f64>,
        prob: &MixedIntegerQp,
        rows: &[(usize, Vec<(usize, f64)>, f64, f64)],
        settings: &QpSettings,
        best: &mut Option<f64>,
        solved: &mut usize,
    ) {
        if depth == values.len() {
            let mut qp: QuadraticProgram = prob.base.clone();
            for (pos, &j) in prob.binary_vars.iter().enumerate() {
                qp.lb[j] = values[pos];
                qp.ub[j] = values[pos];
            }
            *solved += 1;
            if let Ok(sol) = solve_qp(&qp, settings) {
                if sol.status == QpStatus::Optimal && best.map_or(true, |b| sol.objective < b) {
                    *best = Some(sol.objective);
                }
            }
            return;
        }
        for v in [0.0, 1.0] {
            values[depth] = v;
            let ok = rows.iter().filter(|r| r.0 == depth).all(|(_, coefs, lo, hi)| {
                let s: f64 = coefs.iter().map(|&(p, a)| a * values[p]).sum();
                s >= lo - 1e-9 && s <= hi + 1e-9
            });
            if ok {
                recurse(depth + 1, values, prob, rows, settings, best, solved);
            }
        }
    }
    recurse(0, &mut values, prob, &rows, &settings, &mut best, &mut solved);
    (best, solved)
}

/// Dense strictly convex QP `min ½xᵀPx + qᵀx  s.t.  Gx ≤ h`.
pub struct DenseQp {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl DenseQp {
    /// Inequality form of a [`QuadraticProgram`]; every finite row side and
    /// variable bound becomes one row of `G`.
    pub fn from_sparse(prob: &QuadraticProgram) -> Self {
        let n = prob.num_vars();
        let p = DMatrix::from_row_slice(n, n, &prob.p.to_dense().concat());
        let a = prob.a.to_dense();
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for (r, coefs) in a.iter().enumerate() {
            if prob.upper[r].is_finite() {
                rows.push((coefs.clone(), prob.upper[r]));
            }
            if prob.lower[r].is_finite() {
                rows.push((coefs.iter().map(|v| -v).collect(), -prob.lower[r]));
            }
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            if prob.ub[j].is_finite() {
                e[j] = 1.0;
                rows.push((e.clone(), prob.ub[j]));
            }
            if prob.lb[j].is_finite() {
                e[j] = -1.0;
                rows.push((e, -prob.lb[j]));
            }
        }
        let g = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]);
        let h = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        DenseQp {
            p,
            q: DVector::from_vec(prob.q.clone()),
            g,
            h,
        }
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x)
    }

    /// Brute-force active-set solve: tries every subset of at most `n`
    /// constraints as equalities and keeps the KKT point that is primal
    /// feasible with non-negative multipliers. `None` means infeasible.
    pub fn solve(&self) -> Option<(DVector<f64>, f64)> {
        let n = self.p.nrows();
        let m = self.g.nrows();
        let mut best: Option<(DVector<f64>, f64)> = None;
        let mut subset: Vec<usize> = Vec::new();
        self.search(0, n, m, &mut subset, &mut best);
        best
    }

    fn search(
        &self,
        start: usize,
        n: usize,
        m: usize,
        subset: &mut Vec<usize>,
        best: &mut Option<(DVector<f64>, f64)>,
    ) {
        self.try_subset(subset, best);
        if subset.len() == n {
            return;
        }
        for i in start..m {
            subset.push(i);
            self.search(i + 1, n, m, subset, best);
            subset.pop();
        }
    }

    fn try_subset(&self, active: &[usize], best: &mut Option<(DVector<f64>, f64)>) {
        let n = self.p.nrows();
        let k = active.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        let mut rhs = DVector::zeros(n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&self.p);
        for i in 0..n {
            rhs[i] = -self.q[i];
        }
        for (r, &c) in active.iter().enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = self.g[(c, j)];
                kkt[(j, n + r)] = self.g[(c, j)];
            }
            rhs[n + r] = self.h[c];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            return;
        };
        let x = sol.rows(0, n).into_owned();
        if (0..k).any(|r| sol[n + r] < -1e-9) {
            return;
        }
        let slack = &self.h - &self.g * &x;
        if slack.iter().any(|&s| s < -1e-9) {
            return;
        }
        let f = self.objective(&x);
        if best.as_ref().map_or(true, |b| f < b.1 - 1e-12) {
            *best = Some((x, f));
        }
    }
}
