//! MARGOT and its feature-selection variants as mixed-integer QPs.
//!
//! Variables, in order: `w` (per branch node, per feature), `b`, `ξ` (per
//! branch node, per sample), `z` (per sample, per last-level node), then `s`
//! for the feature-selection variants and `u` for the soft-budget one.
//! [`VariableMap`] gives the offset of each block and the row range of each
//! constraint family.

mod build;
mod dump;
mod solution;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::BnbError;
use crate::dataset::DatasetError;
use crate::qp::QpError;
use crate::tree::{TreeError, TreeTopology};

pub use build::{build, build_hfs, build_margot, build_sfs, dimensions, Dimensions};
pub use dump::{read_matrix_dump, write_matrix_dump};
pub use solution::{
    big_m_report, check_feasible, extract_tree, feature_report, ConstraintFamily,
    FeasibilityReport, FeatureReport, ModelSolution, FEATURE_THRESHOLD, PRUNED_THRESHOLD,
};

#[derive(Debug, Error)]
pub enum MargotError {
    #[error("invalid hyperparameters: {0}")]
    Hyperparameters(String),
    #[error("solution is infeasible: {0}")]
    InfeasibleSolution(String),
    #[error("solution vector has {got} entries, model has {expected}")]
    SolutionDimension { expected: usize, got: usize },
    #[error("malformed matrix dump at line {line}: {message}")]
    Dump { line: usize, message: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Bnb(#[from] BnbError),
    #[error(transparent)]
    Qp(#[from] QpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Margot,
    Hfs,
    Sfs,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Margot => "MARGOT",
            Variant::Hfs => "HFS-MARGOT",
            Variant::Sfs => "SFS-MARGOT",
        })
    }
}

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_M_XI: f64 = 50.0;
pub const DEFAULT_M_H: f64 = 100.0;
pub const DEFAULT_M_W: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub depth: usize,
    /// Misclassification weight `C_t` per branch node.
    pub c: Vec<f64>,
    pub epsilon: f64,
    pub m_xi: f64,
    pub m_h: f64,
    pub m_w: f64,
    /// Feature budget `B_t` per branch node (HFS and SFS).
    pub budgets: Option<Vec<usize>>,
    /// Soft-budget penalty (SFS).
    pub alpha: Option<f64>,
}

impl Hyperparameters {
    /// Default constants with per-node weights `c`.
    pub fn new(depth: usize, c: Vec<f64>) -> Self {
        Hyperparameters {
            depth,
            c,
            epsilon: DEFAULT_EPSILON,
            m_xi: DEFAULT_M_XI,
            m_h: DEFAULT_M_H,
            m_w: DEFAULT_M_W,
            budgets: None,
            alpha: None,
        }
    }

    /// The same `C` at every branch node.
    pub fn uniform(depth: usize, c: f64) -> Self {
        Self::new(depth, vec![c; (1 << depth) - 1])
    }

    /// One `C` per tree level, shared by the nodes of that level.
    pub fn per_level(c_levels: &[f64]) -> Self {
        let depth = c_levels.len();
        let c = (0..(1usize << depth) - 1)
            .map(|t| c_levels[TreeTopology::level_of(t)])
            .collect();
        Self::new(depth, c)
    }

    pub fn with_budgets(mut self, budgets: Vec<usize>) -> Self {
        self.budgets = Some(budgets);
        self
    }

    /// Expands one budget per level to one per node.
    pub fn with_level_budgets(self, levels: &[usize]) -> Self {
        let budgets = (0..(1usize << self.depth) - 1)
            .map(|t| levels[TreeTopology::level_of(t).min(levels.len() - 1)])
            .collect();
        self.with_budgets(budgets)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn topology(&self) -> Result<TreeTopology, MargotError> {
        Ok(TreeTopology::new(self.depth)?)
    }

    pub fn validate(&self, variant: Variant, n: usize) -> Result<(), MargotError> {
        let bad = |msg: String| Err(MargotError::Hyperparameters(msg));
        let topo = self.topology()?;
        if self.c.len() != topo.num_branch_nodes() {
            return bad(format!(
                "{} weights for {} branch nodes",
                self.c.len(),
                topo.num_branch_nodes()
            ));
        }
        if self.c.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return bad("every C_t must be positive and finite".into());
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("M_xi", self.m_xi),
            ("M_H", self.m_h),
            ("M_w", self.m_w),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite"));
            }
        }
        if variant != Variant::Margot {
            let Some(budgets) = &self.budgets else {
                return bad(format!("{variant} needs feature budgets"));
            };
            if budgets.len() != topo.num_branch_nodes() {
                return bad(format!("{} budgets for {} branch nodes", budgets.len(), topo.num_branch_nodes()));
            }
            if budgets.iter().any(|&b| b < 1 || b > n) {
                return bad(format!("budgets must lie in [1, {n}]"));
            }
        }
        if variant == Variant::Sfs {
            match self.alpha {
                Some(a) if a > 0.0 && a.is_finite() => {}
                _ => return bad("SFS needs a positive alpha".into()),
            }
        }
        Ok(())
    }
}

/// Offsets of the variable blocks and row ranges of the constraint families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    pub variant: Variant,
    pub depth: usize,
    pub num_features: usize,
    pub num_samples: usize,
    pub w: usize,
    pub b: usize,
    pub xi: usize,
    pub z: usize,
    pub s: Option<usize>,
    pub u: Option<usize>,
    pub num_vars: usize,
    pub margin_rows: Range<usize>,
    pub routing_rows: Range<usize>,
    pub assignment_rows: Range<usize>,
    pub linking_rows: Range<usize>,
    pub budget_rows: Range<usize>,
    pub excess_rows: Range<usize>,
    pub warnings: Vec<String>,
}

impl VariableMap {
    pub fn new(variant: Variant, depth: usize, n: usize, m: usize) -> Self {
        let nb = (1usize << depth) - 1;
        let nl = 1usize << (depth - 1);
        let w = 0;
        let b = w + nb * n;
        let xi = b + nb;
        let z = xi + nb * m;
        let mut next = z + m * nl;
        let s = (variant != Variant::Margot).then(|| {
            let s = next;
            next += nb * n;
            s
        });
        let u = (variant == Variant::Sfs).then(|| {
            let u = next;
            next += nb;
            u
        });
        let margin = 0..nb * m;
        let routing = margin.end..margin.end + 2 * (nl - 1) * m;
        let assignment = routing.end..routing.end + m;
        let linking_len = if variant == Variant::Margot { 0 } else { 2 * nb * n };
        let linking = assignment.end..assignment.end + linking_len;
        let budget_len = if variant == Variant::Hfs { nb } else { 0 };
        let budget = linking.end..linking.end + budget_len;
        let excess_len = if variant == Variant::Sfs { nb } else { 0 };
        let excess = budget.end..budget.end + excess_len;
        let mut warnings = Vec::new();
        if nl > m {
            warnings.push(format!(
                "{nl} last-level nodes for {m} samples: some nodes will be empty"
            ));
        }
        VariableMap {
            variant,
            depth,
            num_features: n,
            num_samples: m,
            w,
            b,
            xi,
            z,
            s,
            u,
            num_vars: next,
            margin_rows: margin,
            routing_rows: routing,
            assignment_rows: assignment,
            linking_rows: linking,
            budget_rows: budget,
            excess_rows: excess,
            warnings,
        }
    }

    pub fn num_branch_nodes(&self) -> usize {
        (1 << self.depth) - 1
    }

    pub fn num_last_level(&self) -> usize {
        1 << (self.depth - 1)
    }

    pub fn num_rows(&self) -> usize {
        self.excess_rows.end
    }

    pub fn w(&self, t: usize, j: usize) -> usize {
        self.w + t * self.num_features + j
    }

    pub fn b(&self, t: usize) -> usize {
        self.b + t
    }

    pub fn xi(&self, t: usize, i: usize) -> usize {
        self.xi + t * self.num_samples + i
    }

    /// `z` entry of sample `i` for the `l`-th last-level node.
    pub fn z(&self, i: usize, l: usize) -> usize {
        self.z + i * self.num_last_level() + l
    }

    pub fn s(&self, t: usize, j: usize) -> Option<usize> {
        self.s.map(|s| s + t * self.num_features + j)
    }

    pub fn u(&self, t: usize) -> Option<usize> {
        self.u.map(|u| u + t)
    }

    /// Indices of every binary variable (`z`, then `s`).
    pub fn binary_vars(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (self.z..self.z + self.num_samples * self.num_last_level()).collect();
        if let Some(s) = self.s {
            out.extend(s..s + self.num_branch_nodes() * self.num_features);
        }
        out
    }

    /// Human-readable name of variable `k`.
    pub fn name(&self, k: usize) -> String {
        let n = self.num_features;
        let m = self.num_samples;
        if k < self.b {
            format!("w[{},{}]", k / n, k % n)
        } else if k < self.xi {
            format!("b[{}]", k - self.b)
        } else if k < self.z {
            let r = k - self.xi;
            format!("xi[{},{}]", r / m, r % m)
        } else if k < self.s.or(self.u).unwrap_or(self.num_vars) {
            let r = k - self.z;
            let nl = self.num_last_level();
            format!("z[{},{}]", r / nl, (1 << (self.depth - 1)) - 1 + r % nl)
        } else if self.u.map_or(true, |u| k < u) {
            let r = k - self.s.unwrap_or_default();
            format!("s[{},{}]", r / n, r % n)
        } else {
            format!("u[{}]", k - self.u.unwrap_or_default())
        }
    }
}
