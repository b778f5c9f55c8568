use serde::{Deserialize, Serialize};

use super::{CvSummary, RunnerError};
use crate::bnb::BnbStatus;
use crate::margot::{FeatureReport, Hyperparameters, Variant};
use crate::tree::Metrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSummary {
    pub objective: f64,
    pub wall_time: f64,
    /// Whether branch-and-bound accepted it as the first incumbent.
    pub accepted: bool,
    pub nudged_nodes: Vec<usize>,
    pub timed_out_nodes: Vec<usize>,
    pub big_m_slacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunProvenance {
    pub seed: u64,
    pub generator_seed: Option<u64>,
    /// SHA-256 of the normalized run configuration.
    pub config_hash: String,
    pub version: String,
}

/// JSON report of a training or cross-validation run. Bounds that are
/// infinite (no incumbent, no solved relaxation) are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub dataset: String,
    pub variant: Variant,
    pub hyperparameters: Hyperparameters,
    pub num_train: usize,
    pub num_test: usize,
    pub num_features: usize,
    pub train: Option<Metrics>,
    pub test: Option<Metrics>,
    pub objective: Option<f64>,
    pub lower_bound: Option<f64>,
    pub gap: Option<f64>,
    pub status: BnbStatus,
    pub wall_time: f64,
    pub nodes: u64,
    pub f0: Option<f64>,
    pub f1: Option<f64>,
    pub heuristic: Option<HeuristicSummary>,
    pub features: Option<FeatureReport>,
    pub warnings: Vec<String>,
    pub provenance: RunProvenance,
    pub cv: Option<CvSummary>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String, RunnerError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, RunnerError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Copy with every wall-clock field zeroed, for comparing reruns.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.wall_time = 0.0;
        if let Some(h) = &mut r.heuristic {
            h.wall_time = 0.0;
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub all: Metrics,
    pub train: Option<Metrics>,
    pub test: Option<Metrics>,
    pub features: FeatureReport,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String, RunnerError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
