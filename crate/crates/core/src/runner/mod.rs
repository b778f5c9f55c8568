//! Run orchestration: configuration, training, cross-validation, reports
//! and plots.
//!
//! A training run normalizes the training split, builds the model, computes
//! the local-SVM warm start, runs branch-and-bound and extracts the tree. The
//! saved classifier works on raw feature values: the min-max scaling is folded
//! into its weights and intercepts.

mod config;
mod cv;
mod plot;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::bnb::{solve_miqp, BnbError, BnbParams, BnbResult, BnbStatus};
use crate::dataset::{split_train_test, Dataset, DatasetError, Normalizer, SplitPlan};
use crate::heuristic::{local_svm, HeuristicConfig};
use crate::margot::{
    build, extract_tree, feature_report, write_matrix_dump, Hyperparameters, MargotError,
    ModelSolution, Variant,
};
use crate::tree::{TreeClassifier, TreeError};

pub use config::{
    preset_spec, DatasetConfig, GridConfig, ModelConfig, RunConfig, DEFAULT_FOLDS,
    DEFAULT_TEST_FRACTION, DEFAULT_TIME_LIMIT, DEFAULT_WARM_START_TIME_LIMIT,
};
pub use cv::{
    cross_validate, cv_feature_driven, cv_standard, grid_points, select_feature_driven,
    select_standard, CvRule, CvSummary, GridScore, FEATURE_DRIVEN_TOLERANCE,
};
pub use plot::{plot_2d, plot_lines, write_plot, LineKind, PlotLine};
pub use report::{EvaluationReport, HeuristicSummary, RunProvenance, RunReport};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("plotting needs exactly two features, got {0}")]
    PlotDimension(usize),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Margot(#[from] MargotError),
    #[error(transparent)]
    Bnb(#[from] BnbError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RunnerError {
    /// Errors caused by the configuration or hyperparameters rather than by
    /// the data or the solver.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            RunnerError::Config(_)
                | RunnerError::Toml(_)
                | RunnerError::EmptyGrid
                | RunnerError::Margot(MargotError::Hyperparameters(_))
        )
    }
}

/// Solver settings of a single fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub time_limit: f64,
    pub warm_start_time_limit: f64,
    pub normalize: bool,
    pub warm_start: bool,
    pub seed: u64,
    pub search_log: bool,
    pub dump_matrix: bool,
}

impl FitSettings {
    pub fn from_config(config: &RunConfig) -> Self {
        FitSettings {
            time_limit: config.time_limit,
            warm_start_time_limit: config.warm_start_time_limit,
            normalize: config.normalize,
            warm_start: config.warm_start,
            seed: config.seed,
            search_log: config.search_log,
            dump_matrix: config.dump_matrix,
        }
    }
}

/// Result of training on one dataset.
#[derive(Debug, Clone)]
pub struct Fit {
    /// Classifier on the scaled features the model was trained on.
    pub scaled: Option<TreeClassifier>,
    /// The same classifier on raw features.
    pub classifier: Option<TreeClassifier>,
    pub normalizer: Option<Normalizer>,
    pub result: BnbResult,
    pub heuristic: Option<HeuristicSummary>,
    pub matrix_dump: Option<String>,
    pub warnings: Vec<String>,
}

impl Fit {
    pub fn scale(&self, data: &Dataset) -> Result<Dataset, RunnerError> {
        Ok(match &self.normalizer {
            Some(norm) => norm.apply(data)?,
            None => data.clone(),
        })
    }

    /// Metrics of the scaled classifier on `data` (raw values).
    pub fn metrics(&self, data: &Dataset) -> Result<Option<crate::tree::Metrics>, RunnerError> {
        let Some(clf) = &self.scaled else {
            return Ok(None);
        };
        let scaled = self.scale(data)?;
        Ok(Some(clf.evaluate(&scaled.features, &scaled.labels)?))
    }
}

/// normalize → build → warm start → branch-and-bound → extract.
pub fn fit(
    data: &Dataset,
    variant: Variant,
    hp: &Hyperparameters,
    settings: &FitSettings,
) -> Result<Fit, RunnerError> {
    let start = Instant::now();
    let normalizer = settings.normalize.then(|| Normalizer::fit(data));
    let scaled = match &normalizer {
        Some(norm) => norm.apply(data)?,
        None => data.clone(),
    };
    let (prob, map) = build(&scaled, hp, variant)?;
    let mut warnings = map.warnings.clone();
    let matrix_dump = settings
        .dump_matrix
        .then(|| write_matrix_dump(&prob, Some(&map)));

    let mut heuristic = None;
    let mut warm = None;
    if settings.warm_start {
        let config = HeuristicConfig {
            variant,
            hp: hp.clone(),
            time_limit: settings.warm_start_time_limit,
        };
        let h = local_svm(&scaled, &config)?;
        if !h.timed_out_nodes.is_empty() {
            warnings.push(format!(
                "warm start hit its time limit at nodes {:?}",
                h.timed_out_nodes
            ));
        }
        warm = Some(h.to_vector());
        heuristic = Some(HeuristicSummary {
            objective: h.solution.objective,
            wall_time: h.wall_time,
            accepted: false,
            nudged_nodes: h.nudged_nodes,
            timed_out_nodes: h.timed_out_nodes,
            big_m_slacks: h.big_m_slacks,
        });
    }

    let params = BnbParams {
        time_limit: (settings.time_limit - start.elapsed().as_secs_f64()).max(f64::MIN_POSITIVE),
        seed: settings.seed,
        log: settings.search_log,
        ..BnbParams::default()
    };
    let result = solve_miqp(&prob, &params, warm.as_deref())?;
    if let Some(h) = &mut heuristic {
        h.accepted = result.stats.warm_start_accepted;
    }
    let scaled_clf = match &result.x {
        Some(x) => {
            let sol = ModelSolution::from_vector(&map, hp, x)?;
            Some(extract_tree(&sol, &map, &scaled)?)
        }
        None => None,
    };
    let classifier = match (&scaled_clf, &normalizer) {
        (Some(clf), Some(norm)) => Some(unscale(clf, norm)?),
        (Some(clf), None) => Some(clf.clone()),
        _ => None,
    };
    Ok(Fit {
        scaled: scaled_clf,
        classifier,
        normalizer,
        result,
        heuristic,
        matrix_dump,
        warnings,
    })
}

/// Rewrites a classifier trained on min-max scaled features so that it takes
/// raw features: `w'_j = w_j / (max_j − min_j)`, `b' = b − Σ_j w'_j min_j`.
/// Constant features get weight 0, matching the scaler.
pub fn unscale(clf: &TreeClassifier, norm: &Normalizer) -> Result<TreeClassifier, RunnerError> {
    let topo = clf.topology().clone();
    let mut weights = Vec::with_capacity(topo.num_branch_nodes());
    let mut intercepts = Vec::with_capacity(topo.num_branch_nodes());
    for t in topo.branch_nodes() {
        let mut b = clf.intercept(t);
        let w: Vec<f64> = clf
            .weights(t)
            .iter()
            .enumerate()
            .map(|(j, &wj)| {
                let range = norm.max[j] - norm.min[j];
                if range > 0.0 {
                    let v = wj / range;
                    b -= v * norm.min[j];
                    v
                } else {
                    0.0
                }
            })
            .collect();
        weights.push(w);
        intercepts.push(b);
    }
    Ok(TreeClassifier::new(
        topo,
        weights,
        intercepts,
        clf.feature_names().to_vec(),
    )?)
}

/// Outcome of `train`, `cv` and `cv-fs`.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub report: RunReport,
    pub classifier: Option<TreeClassifier>,
    pub matrix_dump: Option<String>,
    pub search_log: Vec<String>,
}

impl TrainOutcome {
    /// Infeasible model.
    pub fn is_infeasible(&self) -> bool {
        self.report.status == BnbStatus::Infeasible
    }

    /// Search stopped by a limit before any feasible tree was found.
    pub fn is_limit_without_incumbent(&self) -> bool {
        self.classifier.is_none()
            && matches!(
                self.report.status,
                BnbStatus::TimeLimit | BnbStatus::NodeLimit | BnbStatus::Stalled
            )
    }
}

/// Hold-out split of `data` per the config; without a test fraction every
/// sample is used for training.
pub fn split(config: &RunConfig, data: &Dataset) -> Result<SplitPlan, RunnerError> {
    if config.test_fraction > 0.0 {
        Ok(split_train_test(data, config.test_fraction, config.seed)?)
    } else {
        Ok(SplitPlan {
            train: (0..data.num_samples()).collect(),
            test: Vec::new(),
            folds: Vec::new(),
            stratified: true,
        })
    }
}

/// Trains the single hyperparameter point of `config.model`.
pub fn train(config: &RunConfig) -> Result<TrainOutcome, RunnerError> {
    let hp = config.model.hyperparameters()?;
    let data = config.load_dataset()?;
    let plan = split(config, &data)?;
    finish(config, "train", &data, &plan, hp, None)
}

/// Trains `hp` on the training split and assembles the report.
pub(crate) fn finish(
    config: &RunConfig,
    command: &str,
    data: &Dataset,
    plan: &SplitPlan,
    hp: Hyperparameters,
    cv: Option<CvSummary>,
) -> Result<TrainOutcome, RunnerError> {
    let variant = config.model.variant;
    let train_data = data.subset(&plan.train);
    let test_data = (!plan.test.is_empty()).then(|| data.subset(&plan.test));
    let fit = fit(&train_data, variant, &hp, &FitSettings::from_config(config))?;
    let train_metrics = fit.metrics(&train_data)?;
    let test_metrics = match &test_data {
        Some(test) => fit.metrics(test)?,
        None => None,
    };
    let mut warnings = data.provenance.warnings.clone();
    warnings.extend(fit.warnings.iter().cloned());
    let r = &fit.result;
    let report = RunReport {
        command: command.into(),
        dataset: data.provenance.source.clone(),
        variant,
        hyperparameters: hp,
        num_train: plan.train.len(),
        num_test: plan.test.len(),
        num_features: data.num_features(),
        train: train_metrics,
        test: test_metrics,
        objective: finite(r.objective),
        lower_bound: finite(r.bound),
        gap: finite(r.gap),
        status: r.status,
        wall_time: r.stats.wall_time,
        nodes: r.stats.nodes,
        f0: r.stats.f0,
        f1: r.stats.f1,
        heuristic: fit.heuristic.clone(),
        features: fit.classifier.as_ref().map(feature_report),
        warnings,
        provenance: RunProvenance {
            seed: config.seed,
            generator_seed: matches!(config.dataset, DatasetConfig::Generator { .. })
                .then(|| config.generator_seed()),
            config_hash: config.hash(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        cv,
    };
    Ok(TrainOutcome {
        report,
        classifier: fit.classifier,
        matrix_dump: fit.matrix_dump,
        search_log: fit.result.log,
    })
}

pub(crate) fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Metrics of a saved classifier on the dataset of `config`: the whole set,
/// and the train and test splits when a test fraction is set.
pub fn evaluate(
    config: &RunConfig,
    clf: &TreeClassifier,
) -> Result<EvaluationReport, RunnerError> {
    let data = config.load_dataset()?;
    if data.num_features() != clf.num_features() {
        return Err(TreeError::Dimension {
            expected: clf.num_features(),
            got: data.num_features(),
        }
        .into());
    }
    let plan = split(config, &data)?;
    let on = |idx: &[usize]| -> Result<_, RunnerError> {
        let part = data.subset(idx);
        Ok(clf.evaluate(&part.features, &part.labels)?)
    };
    Ok(EvaluationReport {
        dataset: data.provenance.source.clone(),
        all: clf.evaluate(&data.features, &data.labels)?,
        train: (!plan.test.is_empty()).then(|| on(&plan.train)).transpose()?,
        test: (!plan.test.is_empty()).then(|| on(&plan.test)).transpose()?,
        features: feature_report(clf),
    })
}

/// Writes `report.json`, `model.json` and, when present, `problem.miqp`,
/// `search.log` and `plot.svg` (two-feature data) into `dir`.
pub fn write_outputs(
    outcome: &TrainOutcome,
    data_for_plot: Option<&Dataset>,
    dir: &Path,
) -> Result<Vec<PathBuf>, RunnerError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: &str| -> Result<(), RunnerError> {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put("report.json", &outcome.report.to_json()?)?;
    if let Some(clf) = &outcome.classifier {
        put("model.json", &clf.to_json()?)?;
        if let Some(data) = data_for_plot.filter(|d| d.num_features() == 2) {
            put("plot.svg", &plot_2d(clf, data)?)?;
        }
    }
    if let Some(dump) = &outcome.matrix_dump {
        put("problem.miqp", dump)?;
    }
    if !outcome.search_log.is_empty() {
        put("search.log", &(outcome.search_log.join("\n") + "\n"))?;
    }
    Ok(written)
}

/// Writes `data` as CSV with columns named after the features plus `label`
/// (`1` / `-1`).
pub fn write_csv<W: std::io::Write>(data: &Dataset, writer: W) -> Result<(), RunnerError> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = data.feature_names.clone();
    header.push("label".into());
    out.write_record(&header)?;
    for (x, y) in data.features.iter().zip(&data.labels) {
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        row.push(if *y > 0.0 { "1".into() } else { "-1".into() });
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
