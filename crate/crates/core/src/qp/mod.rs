//! Convex quadratic programming.
//!
//! Problems have the form
//!
//! ```text
//!     minimize     ½ xᵀ P x + qᵀ x
//!     subject to   ℓ ≤ A x ≤ u
//!                  lb ≤ x ≤ ub
//! ```
//!
//! with `P` symmetric positive semidefinite. Infinite entries in `ℓ`, `u`,
//! `lb`, `ub` mean the side is absent. [`solve_qp`] is backed by the Clarabel
//! interior-point solver; [`kkt_residual`] recomputes the optimality
//! conditions independently so every reported `Optimal` status is checked
//! against the original, unscaled problem.

mod kkt;
mod solver;
mod sparse;
mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kkt::{dual_objective, kkt_residual, KktResiduals};
pub use solver::solve_qp;
pub use sparse::SparseMatrix;
pub use svm::{solve_svm, solve_svm_bounded, SvmSolution};

/// Magnitudes at or above this are treated as infinite bounds.
pub const INFINITY_THRESHOLD: f64 = 1e20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix P is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix P is not positive semidefinite")]
    NonPsd,
    #[error("invalid bounds at index {index}: lower {lower} > upper {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("non-finite problem data: {0}")]
    NonFinite(String),
    #[error("problem is unbounded below")]
    Unbounded,
    #[error("interior-point backend failed: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProgram {
    pub p: SparseMatrix,
    pub q: Vec<f64>,
    pub a: SparseMatrix,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

impl QuadraticProgram {
    /// Problem with `n` free variables, no constraints and zero objective.
    pub fn new(n: usize) -> Self {
        QuadraticProgram {
            p: SparseMatrix::zeros(n, n),
            q: vec![0.0; n],
            a: SparseMatrix::zeros(0, n),
            lower: Vec::new(),
            upper: Vec::new(),
            lb: vec![f64::NEG_INFINITY; n],
            ub: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_rows(&self) -> usize {
        self.lower.len()
    }

    /// Appends the row `lower ≤ Σ coef·x ≤ upper` and returns its index.
    pub fn add_row(&mut self, coefs: &[(usize, f64)], lower: f64, upper: f64) -> usize {
        let row = self.a.nrows;
        self.a.nrows += 1;
        for &(j, v) in coefs {
            self.a.push(row, j, v);
        }
        self.lower.push(lower);
        self.upper.push(upper);
        row
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let px = self.p.mul_vec(x);
        0.5 * dot(x, &px) + dot(&self.q, x)
    }

    /// Checks dimensions, symmetry, bound ordering and finiteness.
    pub fn validate(&self) -> Result<(), QpError> {
        let n = self.q.len();
        if self.p.nrows != n || self.p.ncols != n {
            return Err(QpError::DimensionMismatch(format!(
                "P is {}x{}, expected {n}x{n}",
                self.p.nrows, self.p.ncols
            )));
        }
        if self.a.ncols != n {
            return Err(QpError::DimensionMismatch(format!(
                "A has {} columns, expected {n}",
                self.a.ncols
            )));
        }
        let r = self.a.nrows;
        if self.lower.len() != r || self.upper.len() != r {
            return Err(QpError::DimensionMismatch(format!(
                "row bounds have lengths {}/{}, expected {r}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.lb.len() != n || self.ub.len() != n {
            return Err(QpError::DimensionMismatch(format!(
                "variable bounds have lengths {}/{}, expected {n}",
                self.lb.len(),
                self.ub.len()
            )));
        }
        if self.q.iter().any(|v| !v.is_finite())
            || self.p.entries.iter().any(|e| !e.2.is_finite())
            || self.a.entries.iter().any(|e| !e.2.is_finite())
        {
            return Err(QpError::NonFinite("P, q or A".into()));
        }
        if self.p.entries.iter().any(|&(i, j, _)| i >= n || j >= n)
            || self.a.entries.iter().any(|&(i, j, _)| i >= r || j >= n)
        {
            return Err(QpError::DimensionMismatch("triplet index out of range".into()));
        }
        let asym = self.p.asymmetry();
        if asym > 1e-12 {
            return Err(QpError::NotSymmetric(asym));
        }
        for (index, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(QpError::InvalidBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        for (index, (&lo, &hi)) in self.lb.iter().zip(&self.ub).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(QpError::InvalidBounds {
                    index: r + index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    /// Positive-semidefiniteness test: Cholesky of `P + 1e-10·I`.
    ///
    /// Diagonal `P` is checked entrywise.
    pub fn check_psd(&self) -> Result<(), QpError> {
        const SHIFT: f64 = 1e-10;
        if self.p.is_diagonal() {
            let mut diag = vec![0.0; self.num_vars()];
            for &(i, _, v) in &self.p.entries {
                diag[i] += v;
            }
            return if diag.iter().all(|&d| d + SHIFT > 0.0) {
                Ok(())
            } else {
                Err(QpError::NonPsd)
            };
        }
        let mut m = self.p.to_dense();
        let n = m.len();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += SHIFT;
        }
        for j in 0..n {
            let mut d = m[j][j];
            for k in 0..j {
                d -= m[j][k] * m[j][k];
            }
            if d <= 0.0 {
                return Err(QpError::NonPsd);
            }
            let d = d.sqrt();
            m[j][j] = d;
            for i in j + 1..n {
                let mut s = m[i][j];
                for k in 0..j {
                    s -= m[i][k] * m[j][k];
                }
                m[i][j] = s / d;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

/// Lagrange multipliers. A positive entry means the upper side of the row
/// (or variable bound) is active, a negative entry the lower side, so that
/// stationarity reads `P x + q + Aᵀ y + v = 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Duals {
    pub rows: Vec<f64>,
    pub bounds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: QpStatus,
    pub duals: Duals,
    pub residuals: KktResiduals,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSettings {
    /// Absolute tolerance on primal and dual infeasibility.
    pub tol: f64,
    pub infeasibility_tol: f64,
    pub max_iter: u32,
    /// Run the PSD test before solving. Callers that solve many problems
    /// sharing one `P` check it once and switch this off.
    pub validate_psd: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            tol: 1e-6,
            infeasibility_tol: 1e-8,
            max_iter: 200,
            validate_psd: true,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn is_finite_bound(v: f64) -> bool {
    v.abs() < INFINITY_THRESHOLD
}
