use serde::{Deserialize, Serialize};

use super::{dot, solve_qp, QpError, QpSettings, QpStatus, QuadraticProgram, SparseMatrix};

/// Soft-margin linear SVM solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSolution {
    pub w: Vec<f64>,
    pub b: f64,
    /// Hinge slacks `max(0, 1 − yⁱ(wᵀxⁱ + b))`, recomputed from `(w, b)`.
    pub xi: Vec<f64>,
    pub objective: f64,
    pub status: QpStatus,
}

impl SvmSolution {
    pub fn margin(&self) -> f64 {
        2.0 / dot(&self.w, &self.w).sqrt()
    }
}

/// Solves `min ½‖w‖² + Σ Cᵢ ξᵢ  s.t.  yⁱ(wᵀxⁱ + b) ≥ 1 − ξᵢ, ξ ≥ 0`.
///
/// Features flagged in `fixed_zero_features` are held at `w_j = 0`.
pub fn solve_svm(
    points: &[Vec<f64>],
    labels: &[f64],
    c: &[f64],
    fixed_zero_features: Option<&[bool]>,
) -> Result<SvmSolution, QpError> {
    solve_svm_bounded(points, labels, c, fixed_zero_features, None)
}

/// [`solve_svm`] with the extra box `|w_j| ≤ weight_bound`.
pub fn solve_svm_bounded(
    points: &[Vec<f64>],
    labels: &[f64],
    c: &[f64],
    fixed_zero_features: Option<&[bool]>,
    weight_bound: Option<f64>,
) -> Result<SvmSolution, QpError> {
    let m = points.len();
    if m == 0 {
        return Err(QpError::DimensionMismatch("SVM needs at least one sample".into()));
    }
    let n = points[0].len();
    if labels.len() != m || c.len() != m || points.iter().any(|p| p.len() != n) {
        return Err(QpError::DimensionMismatch(
            "points, labels and weights disagree in length".into(),
        ));
    }
    if let Some(mask) = fixed_zero_features {
        if mask.len() != n {
            return Err(QpError::DimensionMismatch("feature mask length".into()));
        }
    }
    if c.iter().any(|&ci| !(ci > 0.0) || !ci.is_finite()) {
        return Err(QpError::NonFinite("misclassification weights must be positive".into()));
    }

    // One class only: w = 0, b = ŷ has zero cost and is optimal.
    let first = labels[0];
    if labels.iter().all(|&y| y == first) {
        return Ok(SvmSolution {
            w: vec![0.0; n],
            b: first,
            xi: vec![0.0; m],
            objective: 0.0,
            status: QpStatus::Optimal,
        });
    }

    let active: Vec<usize> = (0..n)
        .filter(|&j| fixed_zero_features.map_or(true, |mask| !mask[j]))
        .collect();
    let k = active.len();
    let b_var = k;
    let xi0 = k + 1;
    let mut qp = QuadraticProgram::new(k + 1 + m);
    qp.p = SparseMatrix::zeros(k + 1 + m, k + 1 + m);
    for j in 0..k {
        qp.p.push(j, j, 1.0);
        if let Some(bound) = weight_bound {
            qp.lb[j] = -bound;
            qp.ub[j] = bound;
        }
    }
    for i in 0..m {
        qp.q[xi0 + i] = c[i];
        qp.lb[xi0 + i] = 0.0;
        let y = labels[i];
        let mut row: Vec<(usize, f64)> = active
            .iter()
            .enumerate()
            .map(|(jj, &j)| (jj, y * points[i][j]))
            .collect();
        row.push((b_var, y));
        row.push((xi0 + i, 1.0));
        qp.add_row(&row, 1.0, f64::INFINITY);
    }
    let settings = QpSettings {
        tol: 1e-8,
        validate_psd: false,
        ..QpSettings::default()
    };
    let sol = solve_qp(&qp, &settings)?;
    let mut w = vec![0.0; n];
    for (jj, &j) in active.iter().enumerate() {
        w[j] = sol.x[jj];
    }
    let b = sol.x[b_var];
    let xi: Vec<f64> = points
        .iter()
        .zip(labels)
        .map(|(x, &y)| (1.0 - y * (dot(&w, x) + b)).max(0.0))
        .collect();
    let objective = 0.5 * dot(&w, &w) + dot(c, &xi);
    Ok(SvmSolution {
        w,
        b,
        xi,
        objective,
        status: sol.status,
    })
}
