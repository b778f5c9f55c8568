use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunnerError;
use crate::dataset::{gen_partitions, load_csv, load_libsvm, CsvOptions, Dataset, GeneratorSpec};
use crate::margot::{Hyperparameters, Variant};
use crate::tree::TreeTopology;

pub const DEFAULT_TIME_LIMIT: f64 = 600.0;
pub const DEFAULT_WARM_START_TIME_LIMIT: f64 = 30.0;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_FOLDS: usize = 4;

/// A run description, read from TOML.
///
/// ```toml
/// seed = 7
/// time_limit = 600.0
/// output_dir = "out"
///
/// [dataset]
/// format = "generator"
/// preset = "4-partitions"
///
/// [model]
/// variant = "margot"
/// depth = 2
/// c_levels = [100.0, 100.0]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub seed: u64,
    /// Overall limit for one training run, warm start included.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_warm_start_time_limit")]
    pub warm_start_time_limit: f64,
    /// Fraction of samples held out for testing; `0` trains on everything.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Write the MIQP matrices of the final training problem.
    #[serde(default)]
    pub dump_matrix: bool,
    /// Keep per-node search-log lines.
    #[serde(default)]
    pub search_log: bool,
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT
}

fn default_warm_start_time_limit() -> f64 {
    DEFAULT_WARM_START_TIME_LIMIT
}

fn default_test_fraction() -> f64 {
    DEFAULT_TEST_FRACTION
}

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    Csv {
        path: PathBuf,
        label_column: String,
        positive_label: String,
        #[serde(default)]
        nominal_columns: Vec<String>,
    },
    Libsvm {
        path: PathBuf,
        /// Defaults to the larger of the two label values.
        #[serde(default)]
        positive_label: Option<f64>,
    },
    Generator {
        /// `4-partitions` or `6-partitions`.
        #[serde(default)]
        preset: Option<String>,
        #[serde(default)]
        spec: Option<GeneratorSpec>,
        /// Defaults to the run seed.
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// One hyperparameter point. `C` and budgets are given either per level
/// (`*_levels`, length `D`) or per node (`*_nodes`, length `2^D − 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    pub depth: usize,
    #[serde(default)]
    pub c_levels: Option<Vec<f64>>,
    #[serde(default)]
    pub c_nodes: Option<Vec<f64>>,
    #[serde(default)]
    pub budget_levels: Option<Vec<usize>>,
    #[serde(default)]
    pub budget_nodes: Option<Vec<usize>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub m_xi: Option<f64>,
    #[serde(default)]
    pub m_h: Option<f64>,
    #[serde(default)]
    pub m_w: Option<f64>,
}

/// Cross-validation grid. Omitted axes take the variant's standard grid:
/// `C ∈ 10^{−5..5}` per level for MARGOT and HFS, `C ∈ 10^{−4,−2,0,2,4}`
/// with `α ∈ 2^{0..10}` and unit budgets for SFS, level budgets from
/// `{1, 2, 3}` for HFS.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub c_exponents: Option<Vec<i32>>,
    #[serde(default)]
    pub budget_values: Option<Vec<usize>>,
    #[serde(default)]
    pub alpha_exponents: Option<Vec<i32>>,
    /// Per-run limit during cross-validation; defaults to `time_limit`.
    #[serde(default)]
    pub time_limit: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunnerError> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative dataset and output paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        match &mut config.dataset {
            DatasetConfig::Csv { path, .. } | DatasetConfig::Libsvm { path, .. } => {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            DatasetConfig::Generator { .. } => {}
        }
        if let Some(out) = &mut config.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        let bad = |m: &str| Err(RunnerError::Config(m.into()));
        if !(self.time_limit > 0.0) || !(self.warm_start_time_limit > 0.0) {
            return bad("time limits must be positive");
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return bad("test_fraction must lie in [0, 1)");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        TreeTopology::new(self.model.depth).map_err(|e| RunnerError::Config(e.to_string()))?;
        if let DatasetConfig::Generator { preset, spec, .. } = &self.dataset {
            if preset.is_some() == spec.is_some() {
                return bad("generator needs exactly one of `preset` and `spec`");
            }
        }
        if let Some(grid) = &self.grid {
            let empty = |v: &Option<Vec<_>>| v.as_ref().is_some_and(|v: &Vec<_>| v.is_empty());
            if empty(&grid.c_exponents) || empty(&grid.alpha_exponents) {
                return Err(RunnerError::EmptyGrid);
            }
            if grid.budget_values.as_ref().is_some_and(|v| v.is_empty()) {
                return Err(RunnerError::EmptyGrid);
            }
            if grid.time_limit.is_some_and(|t| !(t > 0.0)) {
                return bad("grid.time_limit must be positive");
            }
        }
        Ok(())
    }

    /// SHA-256 of the config re-serialized as TOML.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    pub fn generator_seed(&self) -> u64 {
        match &self.dataset {
            DatasetConfig::Generator { seed: Some(s), .. } => *s,
            _ => self.seed,
        }
    }

    pub fn load_dataset(&self) -> Result<Dataset, RunnerError> {
        Ok(match &self.dataset {
            DatasetConfig::Csv {
                path,
                label_column,
                positive_label,
                nominal_columns,
            } => load_csv(
                path,
                &CsvOptions {
                    label_column: label_column.clone(),
                    positive_label: positive_label.clone(),
                    nominal_columns: nominal_columns.clone(),
                },
            )?,
            DatasetConfig::Libsvm {
                path,
                positive_label,
            } => load_libsvm(path, *positive_label)?,
            DatasetConfig::Generator { preset, spec, .. } => {
                let spec = match (preset.as_deref(), spec) {
                    (Some(name), _) => preset_spec(name)?,
                    (None, Some(spec)) => spec.clone(),
                    (None, None) => unreachable!("validated"),
                };
                gen_partitions(&spec, self.generator_seed())?
            }
        })
    }
}

pub fn preset_spec(name: &str) -> Result<GeneratorSpec, RunnerError> {
    match name {
        "4-partitions" => Ok(GeneratorSpec::four_partitions()),
        "6-partitions" => Ok(GeneratorSpec::six_partitions()),
        _ => Err(RunnerError::Config(format!(
            "unknown generator preset `{name}` (expected 4-partitions or 6-partitions)"
        ))),
    }
}

impl ModelConfig {
    pub fn new(variant: Variant, depth: usize) -> Self {
        ModelConfig {
            variant,
            depth,
            c_levels: None,
            c_nodes: None,
            budget_levels: None,
            budget_nodes: None,
            alpha: None,
            epsilon: None,
            m_xi: None,
            m_h: None,
            m_w: None,
        }
    }

    /// The single point described by this section.
    pub fn hyperparameters(&self) -> Result<Hyperparameters, RunnerError> {
        let c = match (&self.c_levels, &self.c_nodes) {
            (Some(levels), None) => {
                if levels.len() != self.depth {
                    return Err(RunnerError::Config(format!(
                        "c_levels has {} entries for depth {}",
                        levels.len(),
                        self.depth
                    )));
                }
                Hyperparameters::per_level(levels).c
            }
            (None, Some(nodes)) => nodes.clone(),
            _ => {
                return Err(RunnerError::Config(
                    "model needs exactly one of `c_levels` and `c_nodes`".into(),
                ))
            }
        };
        let mut hp = self.with_constants(Hyperparameters::new(self.depth, c));
        match (&self.budget_levels, &self.budget_nodes) {
            (Some(levels), None) => hp = hp.with_level_budgets(levels),
            (None, Some(nodes)) => hp = hp.with_budgets(nodes.clone()),
            (None, None) => {}
            _ => {
                return Err(RunnerError::Config(
                    "give at most one of `budget_levels` and `budget_nodes`".into(),
                ))
            }
        }
        if hp.budgets.as_ref().is_some_and(|b| b.is_empty()) {
            return Err(RunnerError::Config("empty budget list".into()));
        }
        hp.alpha = self.alpha;
        Ok(hp)
    }

    /// Applies the optional big-M and ε overrides.
    pub fn with_constants(&self, mut hp: Hyperparameters) -> Hyperparameters {
        if let Some(v) = self.epsilon {
            hp.epsilon = v;
        }
        if let Some(v) = self.m_xi {
            hp.m_xi = v;
        }
        if let Some(v) = self.m_h {
            hp.m_h = v;
        }
        if let Some(v) = self.m_w {
            hp.m_w = v;
        }
        hp
    }
}
