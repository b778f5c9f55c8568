//! Tree topology, routing, prediction and classification metrics.
//!
//! Nodes are numbered breadth-first: the root is `0` and the children of
//! `t` are `2t + 1` (left) and `2t + 2` (right). A depth-`D` tree has branch
//! nodes `0..2^D − 1` and leaves `2^D − 1..2^(D+1) − 1`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("tree depth must be at least 1")]
    ZeroDepth,
    #[error("depth {0} is too large")]
    TooDeep(usize),
    #[error("classifier has {got} hyperplanes, topology needs {expected}")]
    NodeCount { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coefficient at node {0}")]
    NonFinite(usize),
    #[error("cannot evaluate on an empty dataset")]
    EmptyDataset,
    #[error("label {0} is not -1 or +1")]
    BadLabel(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Node sets of a complete binary tree of depth `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    depth: usize,
}

impl TreeTopology {
    pub fn new(depth: usize) -> Result<Self, TreeError> {
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        if depth > 20 {
            return Err(TreeError::TooDeep(depth));
        }
        Ok(TreeTopology { depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_branch_nodes(&self) -> usize {
        (1 << self.depth) - 1
    }

    /// 𝒯_B
    pub fn branch_nodes(&self) -> std::ops::Range<usize> {
        0..self.num_branch_nodes()
    }

    /// 𝒯_B′: branch nodes above the last branching level.
    pub fn upper_branch_nodes(&self) -> std::ops::Range<usize> {
        0..(1 << (self.depth - 1)) - 1
    }

    /// 𝒯_B″: branch nodes whose children are leaves.
    pub fn last_level_nodes(&self) -> std::ops::Range<usize> {
        (1 << (self.depth - 1)) - 1..self.num_branch_nodes()
    }

    /// 𝒯_L
    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.num_branch_nodes()..(1 << (self.depth + 1)) - 1
    }

    pub fn is_last_level(&self, t: usize) -> bool {
        self.last_level_nodes().contains(&t)
    }

    /// Position of `t ∈ 𝒯_B″` within the last level (column index of `z`).
    pub fn last_level_index(&self, t: usize) -> usize {
        debug_assert!(self.is_last_level(t));
        t - self.last_level_nodes().start
    }

    pub fn level_of(t: usize) -> usize {
        (usize::BITS - 1 - (t + 1).leading_zeros()) as usize
    }

    pub fn left_child(t: usize) -> usize {
        2 * t + 1
    }

    pub fn right_child(t: usize) -> usize {
        2 * t + 2
    }

    /// 𝒮(t): branch nodes of the subtree rooted at `t`.
    pub fn subtree(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut level = vec![t];
        while !level.is_empty() {
            out.extend(level.iter().copied());
            level = level
                .iter()
                .flat_map(|&u| [Self::left_child(u), Self::right_child(u)])
                .filter(|&u| u < self.num_branch_nodes())
                .collect();
        }
        out.sort_unstable();
        out
    }

    /// 𝒮″(t) = 𝒮(t) ∩ 𝒯_B″, as a contiguous range.
    pub fn last_level_under(&self, t: usize) -> std::ops::Range<usize> {
        let level = Self::level_of(t);
        let span = 1usize << (self.depth - 1 - level);
        let offset = t + 1 - (1 << level);
        let first = self.last_level_nodes().start + offset * span;
        first..first + span
    }

    /// 𝒮″_L(t) for `t ∈ 𝒯_B′`.
    pub fn last_level_left(&self, t: usize) -> std::ops::Range<usize> {
        self.last_level_under(Self::left_child(t))
    }

    /// 𝒮″_R(t) for `t ∈ 𝒯_B′`.
    pub fn last_level_right(&self, t: usize) -> std::ops::Range<usize> {
        self.last_level_under(Self::right_child(t))
    }
}

/// Path of a sample through the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub last_branch: usize,
    pub leaf: usize,
    /// Branch nodes visited, root first.
    pub path: Vec<usize>,
}

/// Oblique tree with one hyperplane `(w_t, b_t)` per branch node.
///
/// Leaf labels are implicit: right leaves predict `+1`, left leaves `−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeClassifier {
    topology: TreeTopology,
    weights: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
    feature_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    depth: usize,
    weights: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
    feature_names: Vec<String>,
}

impl TreeClassifier {
    pub fn new(
        topology: TreeTopology,
        weights: Vec<Vec<f64>>,
        intercepts: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self, TreeError> {
        let expected = topology.num_branch_nodes();
        if weights.len() != expected || intercepts.len() != expected {
            return Err(TreeError::NodeCount {
                expected,
                got: weights.len().min(intercepts.len()),
            });
        }
        let n = feature_names.len();
        for (t, (w, b)) in weights.iter().zip(&intercepts).enumerate() {
            if w.len() != n {
                return Err(TreeError::Dimension {
                    expected: n,
                    got: w.len(),
                });
            }
            if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(TreeError::NonFinite(t));
            }
        }
        Ok(TreeClassifier {
            topology,
            weights,
            intercepts,
            feature_names,
        })
    }

    pub fn topology(&self) -> &TreeTopology {
        &self.topology
    }

    pub fn weights(&self, t: usize) -> &[f64] {
        &self.weights[t]
    }

    pub fn intercept(&self, t: usize) -> f64 {
        self.intercepts[t]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    /// `h_t(x) = w_tᵀx + b_t`
    pub fn hyperplane_value(&self, t: usize, x: &[f64]) -> f64 {
        self.weights[t].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercepts[t]
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), TreeError> {
        if x.len() != self.num_features() {
            return Err(TreeError::Dimension {
                expected: self.num_features(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Routes `x` right when `h_t(x) ≥ 0` and left otherwise.
    pub fn route(&self, x: &[f64]) -> Result<Route, TreeError> {
        self.check_dim(x)?;
        let mut t = 0;
        let mut path = Vec::with_capacity(self.topology.depth());
        loop {
            path.push(t);
            let child = if self.hyperplane_value(t, x) >= 0.0 {
                TreeTopology::right_child(t)
            } else {
                TreeTopology::left_child(t)
            };
            if self.topology.is_last_level(t) {
                return Ok(Route {
                    last_branch: t,
                    leaf: child,
                    path,
                });
            }
            t = child;
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, TreeError> {
        let route = self.route(x)?;
        Ok(if route.leaf == TreeTopology::right_child(route.last_branch) {
            1.0
        } else {
            -1.0
        })
    }

    pub fn evaluate(&self, features: &[Vec<f64>], labels: &[f64]) -> Result<Metrics, TreeError> {
        if features.is_empty() {
            return Err(TreeError::EmptyDataset);
        }
        let mut counts = Confusion::default();
        for (x, &y) in features.iter().zip(labels) {
            let pred = self.predict(x)?;
            match (y, pred) {
                (y, p) if y == 1.0 && p == 1.0 => counts.tp += 1,
                (y, p) if y == -1.0 && p == -1.0 => counts.tn += 1,
                (y, _) if y == -1.0 => counts.fp += 1,
                (y, _) if y == 1.0 => counts.fn_ += 1,
                (y, _) => return Err(TreeError::BadLabel(y)),
            }
        }
        Ok(Metrics::from_confusion(counts))
    }

    pub fn to_json(&self) -> Result<String, TreeError> {
        let file = TreeFile {
            depth: self.topology.depth(),
            weights: self.weights.clone(),
            intercepts: self.intercepts.clone(),
            feature_names: self.feature_names.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let file: TreeFile = serde_json::from_str(text)?;
        Self::new(
            TreeTopology::new(file.depth)?,
            file.weights,
            file.intercepts,
            file.feature_names,
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), TreeError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TreeError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Accuracy and balanced accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Confusion,
    pub acc: f64,
    pub bacc: f64,
    /// One class is absent, so its recall term was taken as 0.
    pub degenerate: bool,
}

impl Metrics {
    pub fn from_confusion(c: Confusion) -> Self {
        let total = c.total();
        let acc = if total == 0 {
            0.0
        } else {
            (c.tp + c.tn) as f64 / total as f64
        };
        let positives = c.tp + c.fn_;
        let negatives = c.tn + c.fp;
        let recall = |hit: usize, all: usize| if all == 0 { 0.0 } else { hit as f64 / all as f64 };
        Metrics {
            confusion: c,
            acc,
            bacc: (recall(c.tp, positives) + recall(c.tn, negatives)) / 2.0,
            degenerate: positives == 0 || negatives == 0,
        }
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ACC {:.2}% BACC {:.2}% (TP {} TN {} FP {} FN {})",
            100.0 * self.acc,
            100.0 * self.bacc,
            self.confusion.tp,
            self.confusion.tn,
            self.confusion.fp,
            self.confusion.fn_
        )?;
        if self.degenerate {
            write!(f, " [single class]")?;
        }
        Ok(())
    }
}
