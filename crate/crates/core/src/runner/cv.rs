use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{finish, fit, split, FitSettings, GridConfig, ModelConfig, RunConfig, RunnerError, TrainOutcome};
use crate::dataset::{kfold, Dataset, SplitPlan};
use crate::margot::{feature_report, Hyperparameters, Variant};

/// Points within this fraction of the best mean validation accuracy are
/// eligible under the feature-driven rule.
pub const FEATURE_DRIVEN_TOLERANCE: f64 = 0.975;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvRule {
    /// Best mean validation accuracy.
    Standard,
    /// Fewest features among points within [`FEATURE_DRIVEN_TOLERANCE`]·γ.
    FeatureDriven,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub index: usize,
    pub hyperparameters: Hyperparameters,
    pub fold_acc: Vec<f64>,
    pub mean_acc: f64,
    /// `Σ_t |F_t|` summed over folds.
    pub feature_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub rule: CvRule,
    pub folds: usize,
    pub stratified: bool,
    pub selected: usize,
    /// Best mean validation accuracy (feature-driven rule).
    pub gamma: Option<f64>,
    pub scores: Vec<GridScore>,
}

fn powers(base: f64, exponents: &[i32]) -> Vec<f64> {
    exponents.iter().map(|&e| base.powi(e)).collect()
}

/// Every tuple of `values` of length `len`, first position varying slowest.
fn product<T: Clone>(values: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Enumerates the grid in a fixed order: `C` per level (level 0 slowest),
/// then level budgets, then `α`. Budget tuples are non-decreasing from the
/// root down and skip values above `num_features`.
pub fn grid_points(
    model: &ModelConfig,
    grid: &GridConfig,
    num_features: usize,
) -> Result<Vec<Hyperparameters>, RunnerError> {
    let depth = model.depth;
    let variant = model.variant;
    let c_exp = grid.c_exponents.clone().unwrap_or_else(|| match variant {
        Variant::Sfs => vec![-4, -2, 0, 2, 4],
        _ => (-5..=5).collect(),
    });
    let c_tuples = product(&powers(10.0, &c_exp), depth);
    let budget_tuples: Vec<Option<Vec<usize>>> = match variant {
        Variant::Margot => vec![None],
        _ => {
            let default = if variant == Variant::Hfs { vec![1, 2, 3] } else { vec![1] };
            let mut values: Vec<usize> = grid
                .budget_values
                .clone()
                .unwrap_or(default)
                .into_iter()
                .filter(|&b| b >= 1 && b <= num_features)
                .collect();
            values.sort_unstable();
            values.dedup();
            product(&values, depth)
                .into_iter()
                .filter(|t| t.windows(2).all(|w| w[0] <= w[1]))
                .map(Some)
                .collect()
        }
    };
    let alphas: Vec<Option<f64>> = match variant {
        Variant::Sfs => {
            let exp = grid.alpha_exponents.clone().unwrap_or_else(|| (0..=10).collect());
            powers(2.0, &exp).into_iter().map(Some).collect()
        }
        _ => vec![None],
    };
    let mut points = Vec::new();
    for c in &c_tuples {
        for budgets in &budget_tuples {
            for alpha in &alphas {
                let mut hp = model.with_constants(Hyperparameters::per_level(c));
                if let Some(b) = budgets {
                    hp = hp.with_level_budgets(b);
                }
                hp.alpha = *alpha;
                points.push(hp);
            }
        }
    }
    if points.is_empty() {
        return Err(RunnerError::EmptyGrid);
    }
    Ok(points)
}

/// Mean validation accuracy and feature count of every grid point over the
/// folds of `plan`. Points and folds run in parallel.
pub fn cross_validate(
    data: &Dataset,
    plan: &SplitPlan,
    variant: Variant,
    points: &[Hyperparameters],
    settings: &FitSettings,
) -> Result<Vec<GridScore>, RunnerError> {
    if points.is_empty() {
        return Err(RunnerError::EmptyGrid);
    }
    let k = plan.folds.len();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..k).map(move |f| (p, f)))
        .collect();
    let results: Vec<(f64, usize)> = jobs
        .par_iter()
        .map(|&(p, f)| -> Result<(f64, usize), RunnerError> {
            let train = data.subset(&plan.fold_train(f));
            let valid = data.subset(&plan.folds[f]);
            let run = fit(&train, variant, &points[p], settings)?;
            Ok(match (run.metrics(&valid)?, &run.classifier) {
                (Some(m), Some(clf)) => (m.acc, feature_report(clf).sum_per_node()),
                _ => (0.0, 0),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(points
        .iter()
        .enumerate()
        .map(|(p, hp)| {
            let mine = &results[p * k..(p + 1) * k];
            let fold_acc: Vec<f64> = mine.iter().map(|r| r.0).collect();
            GridScore {
                index: p,
                hyperparameters: hp.clone(),
                mean_acc: fold_acc.iter().sum::<f64>() / k as f64,
                fold_acc,
                feature_count: mine.iter().map(|r| r.1).sum(),
            }
        })
        .collect())
}

/// Highest mean accuracy; ties go to the smallest index.
pub fn select_standard(scores: &[GridScore]) -> Option<usize> {
    let mut best: Option<&GridScore> = None;
    for s in scores {
        if best.map_or(true, |b| s.mean_acc > b.mean_acc) {
            best = Some(s);
        }
    }
    best.map(|s| s.index)
}

/// Among points with mean accuracy in `[0.975γ, γ]`, the fewest features,
/// then the highest mean accuracy, then the smallest index. Returns the
/// selected index and γ.
pub fn select_feature_driven(scores: &[GridScore]) -> Option<(usize, f64)> {
    let gamma = scores.iter().map(|s| s.mean_acc).reduce(f64::max)?;
    let threshold = FEATURE_DRIVEN_TOLERANCE * gamma;
    let mut best: Option<&GridScore> = None;
    for s in scores.iter().filter(|s| s.mean_acc >= threshold) {
        let better = match best {
            None => true,
            Some(b) => {
                s.feature_count < b.feature_count
                    || (s.feature_count == b.feature_count && s.mean_acc > b.mean_acc)
            }
        };
        if better {
            best = Some(s);
        }
    }
    best.map(|s| (s.index, gamma))
}

fn run_cv(config: &RunConfig, rule: CvRule, command: &str) -> Result<TrainOutcome, RunnerError> {
    let grid = config.grid.clone().unwrap_or_default();
    let data = config.load_dataset()?;
    let points = grid_points(&config.model, &grid, data.num_features())?;
    let plan = kfold(&split(config, &data)?, &data, config.folds, config.seed)?;
    let mut settings = FitSettings::from_config(config);
    settings.time_limit = grid.time_limit.unwrap_or(config.time_limit);
    settings.search_log = false;
    settings.dump_matrix = false;
    let scores = cross_validate(&data, &plan, config.model.variant, &points, &settings)?;
    let (selected, gamma) = match rule {
        CvRule::Standard => (select_standard(&scores).ok_or(RunnerError::EmptyGrid)?, None),
        CvRule::FeatureDriven => {
            let (i, g) = select_feature_driven(&scores).ok_or(RunnerError::EmptyGrid)?;
            (i, Some(g))
        }
    };
    let summary = CvSummary {
        rule,
        folds: config.folds,
        stratified: plan.stratified,
        selected,
        gamma,
        scores,
    };
    let hp = points[selected].clone();
    finish(config, command, &data, &plan, hp, Some(summary))
}

/// Grid search selecting the best mean validation accuracy.
pub fn cv_standard(config: &RunConfig) -> Result<TrainOutcome, RunnerError> {
    run_cv(config, CvRule::Standard, "cv")
}

/// Grid search with the feature-driven selection rule.
pub fn cv_feature_driven(config: &RunConfig) -> Result<TrainOutcome, RunnerError> {
    run_cv(config, CvRule::FeatureDriven, "cv-fs")
}
