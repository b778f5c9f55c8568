//! Binary-classification datasets: loading, encoding, normalization,
//! stratified splitting and synthetic generation.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{TreeClassifier, TreeError, TreeTopology};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("expected two label values, found {0:?}")]
    LabelCount(Vec<String>),
    #[error("positive label `{label}` does not occur (labels: {seen:?})")]
    UnknownPositiveLabel { label: String, seen: Vec<String> },
    #[error("row {row}, column `{column}`: `{value}` is not a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("non-finite value at sample {row}, feature {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label {0} is not -1 or +1")]
    BadLabel(f64),
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("generator: {0}")]
    Generator(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub feature_names: Vec<String>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Checks the label set, dimensions and finiteness.
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<f64>,
        feature_names: Vec<String>,
        source: impl Into<String>,
    ) -> Result<Self, DatasetError> {
        if features.is_empty() {
            return Err(DatasetError::Empty);
        }
        if feature_names.is_empty() {
            return Err(DatasetError::NoFeatures);
        }
        if labels.len() != features.len() {
            return Err(DatasetError::Dimension {
                expected: features.len(),
                got: labels.len(),
            });
        }
        for (row, x) in features.iter().enumerate() {
            if x.len() != feature_names.len() {
                return Err(DatasetError::Dimension {
                    expected: feature_names.len(),
                    got: x.len(),
                });
            }
            if let Some(col) = x.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { row, col });
            }
        }
        if let Some(&y) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(DatasetError::BadLabel(y));
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
            provenance: Provenance {
                source: source.into(),
                warnings: Vec::new(),
            },
        })
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Count of `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0.0).count();
        (self.labels.len() - pos, pos)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CsvOptions {
    pub label_column: String,
    pub positive_label: String,
    /// Columns to one-hot encode. Every other non-label column must be numeric.
    #[serde(default)]
    pub nominal_columns: Vec<String>,
}

pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    let mut data = read_csv(file, options)?;
    data.provenance.source = path.display().to_string();
    Ok(data)
}

/// [`load_csv`] on any reader.
pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let label_col = headers
        .iter()
        .position(|h| *h == options.label_column)
        .ok_or_else(|| DatasetError::MissingColumn(options.label_column.clone()))?;
    for name in &options.nominal_columns {
        if !headers.contains(name) {
            return Err(DatasetError::MissingColumn(name.clone()));
        }
    }
    let records: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }

    let seen: BTreeSet<&str> = records.iter().map(|r| &r[label_col]).collect();
    let seen: Vec<String> = seen.into_iter().map(str::to_owned).collect();
    if seen.len() > 2 {
        return Err(DatasetError::LabelCount(seen));
    }
    if !seen.contains(&options.positive_label) && seen.len() == 2 {
        return Err(DatasetError::UnknownPositiveLabel {
            label: options.positive_label.clone(),
            seen,
        });
    }
    let labels = records
        .iter()
        .map(|r| if r[label_col] == *options.positive_label { 1.0 } else { -1.0 })
        .collect();

    // Per input column: None for numeric, or the sorted category list.
    let mut encodings: Vec<(usize, Option<Vec<String>>)> = Vec::new();
    for (c, name) in headers.iter().enumerate() {
        if c == label_col {
            continue;
        }
        if options.nominal_columns.contains(name) {
            let cats: BTreeSet<&str> = records.iter().map(|r| &r[c]).collect();
            encodings.push((c, Some(cats.into_iter().map(str::to_owned).collect())));
        } else {
            encodings.push((c, None));
        }
    }
    let mut feature_names = Vec::new();
    for (c, enc) in &encodings {
        match enc {
            None => feature_names.push(headers[*c].clone()),
            Some(cats) => {
                feature_names.extend(cats.iter().map(|v| format!("{}={v}", headers[*c])))
            }
        }
    }
    let mut features = Vec::with_capacity(records.len());
    for (row, record) in records.iter().enumerate() {
        let mut x = Vec::with_capacity(feature_names.len());
        for (c, enc) in &encodings {
            let cell = &record[*c];
            match enc {
                None => x.push(cell.parse::<f64>().map_err(|_| DatasetError::NonNumeric {
                    row: row + 1,
                    column: headers[*c].clone(),
                    value: cell.to_owned(),
                })?),
                Some(cats) => x.extend(cats.iter().map(|v| if v == cell { 1.0 } else { 0.0 })),
            }
        }
        features.push(x);
    }
    Dataset::new(features, labels, feature_names, "csv")
}

/// Loads `label idx:val …` lines with 1-based indices.
///
/// Labels are mapped to ±1: `positive_label` (compared numerically) becomes
/// `+1`; without it, the larger of the two label values is positive.
pub fn load_libsvm(path: &Path, positive_label: Option<f64>) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    let mut data = read_libsvm(BufReader::new(file), positive_label)?;
    data.provenance.source = path.display().to_string();
    Ok(data)
}

pub fn read_libsvm<R: BufRead>(
    reader: R,
    positive_label: Option<f64>,
) -> Result<Dataset, DatasetError> {
    let mut raw_labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut n = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| DatasetError::Malformed {
            line: lineno + 1,
            message,
        };
        let mut tokens = line.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        let label: f64 = label
            .parse()
            .map_err(|_| malformed(format!("bad label `{label}`")))?;
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| malformed(format!("expected idx:val, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| malformed(format!("bad index `{idx}`")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| malformed(format!("bad value `{val}`")))?;
            n = n.max(idx);
            row.push((idx - 1, val));
        }
        raw_labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut distinct: Vec<f64> = Vec::new();
    for &y in &raw_labels {
        if !distinct.contains(&y) {
            distinct.push(y);
        }
    }
    if distinct.len() > 2 {
        return Err(DatasetError::LabelCount(
            distinct.iter().map(|v| v.to_string()).collect(),
        ));
    }
    let positive = match positive_label {
        Some(p) => p,
        None => distinct.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let n = n.max(1);
    let features = rows
        .into_iter()
        .map(|row| {
            let mut x = vec![0.0; n];
            for (j, v) in row {
                x[j] = v;
            }
            x
        })
        .collect();
    let labels = raw_labels
        .iter()
        .map(|&y| if y == positive { 1.0 } else { -1.0 })
        .collect();
    let names = (1..=n).map(|j| format!("x{j}")).collect();
    Dataset::new(features, labels, names, "libsvm")
}

/// Per-feature min-max scaling to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(data: &Dataset) -> Normalizer {
        let n = data.num_features();
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for x in &data.features {
            for j in 0..n {
                min[j] = min[j].min(x[j]);
                max[j] = max[j].max(x[j]);
            }
        }
        Normalizer { min, max }
    }

    /// `(x − min) / (max − min)`, with constant features mapped to 0. Values
    /// outside the fitted range are not clipped.
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset, DatasetError> {
        if data.num_features() != self.min.len() {
            return Err(DatasetError::Dimension {
                expected: self.min.len(),
                got: data.num_features(),
            });
        }
        Ok(Dataset {
            features: data.features.iter().map(|x| self.transform(x)).collect(),
            ..data.clone()
        })
    }
}

pub fn fit_normalizer(data: &Dataset) -> Normalizer {
    Normalizer::fit(data)
}

pub fn apply_normalizer(norm: &Normalizer, data: &Dataset) -> Result<Dataset, DatasetError> {
    norm.apply(data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Validation indices per fold; together they partition `train`.
    pub folds: Vec<Vec<usize>>,
    pub stratified: bool,
}

impl SplitPlan {
    /// Training indices of fold `f`: `train` minus `folds[f]`.
    pub fn fold_train(&self, f: usize) -> Vec<usize> {
        let held: BTreeSet<usize> = self.folds[f].iter().copied().collect();
        self.train
            .iter()
            .copied()
            .filter(|i| !held.contains(i))
            .collect()
    }
}

fn by_class(labels: &[f64], indices: &[usize]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for &i in indices {
        out[usize::from(labels[i] > 0.0)].push(i);
    }
    out
}

/// Stratified hold-out split with `round(test_fraction · |I|)` test samples.
pub fn split_train_test(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitPlan, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidSplit(format!(
            "test fraction {test_fraction} is not in (0, 1)"
        )));
    }
    let m = data.num_samples();
    let total = (test_fraction * m as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..m).collect();
    let mut classes = by_class(&data.labels, &all);
    for class in classes.iter_mut() {
        class.shuffle(&mut rng);
    }
    // largest-remainder apportionment of the test quota across classes
    let exact: Vec<f64> = classes
        .iter()
        .map(|c| c.len() as f64 * total as f64 / m as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let mut remaining = total - quota.iter().sum::<usize>();
    for &c in order.iter().cycle().take(4) {
        if remaining == 0 {
            break;
        }
        if quota[c] < classes[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, &q) in classes.iter().zip(&quota) {
        test.extend_from_slice(&class[..q]);
        train.extend_from_slice(&class[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train,
        test,
        folds: Vec::new(),
        stratified: true,
    })
}

/// Splits `plan.train` into `k` validation folds, stratified by label when
/// both classes have at least `k` training samples.
pub fn kfold(
    plan: &SplitPlan,
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<SplitPlan, DatasetError> {
    if k < 2 || k > plan.train.len() {
        return Err(DatasetError::InvalidSplit(format!(
            "cannot make {k} folds from {} training samples",
            plan.train.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = by_class(&data.labels, &plan.train);
    let stratified = classes.iter().all(|c| c.len() >= k);
    let groups: Vec<Vec<usize>> = if stratified {
        classes.iter_mut().for_each(|c| c.shuffle(&mut rng));
        classes.to_vec()
    } else {
        let mut all = plan.train.clone();
        all.shuffle(&mut rng);
        vec![all]
    };
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for group in groups {
        for i in group {
            folds[slot % k].push(i);
            slot += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(SplitPlan {
        folds,
        stratified: plan.stratified && stratified,
        ..plan.clone()
    })
}

/// One ground-truth hyperplane `wᵀx + b = 0` with a point-free band of
/// half-width `margin` (Euclidean distance) on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorNode {
    pub w: Vec<f64>,
    pub b: f64,
    #[serde(default)]
    pub margin: f64,
}

/// Synthetic dataset description: a ground-truth oblique tree whose
/// branch nodes carry margin bands. A node with `w = 0` sends every sample to
/// the side given by the sign of `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub depth: usize,
    pub nodes: Vec<GeneratorNode>,
    pub num_points: usize,
    /// Per-feature `[lower, upper]` sampling box.
    pub bounds: Vec<[f64; 2]>,
}

impl GeneratorSpec {
    /// Three hyperplanes on the unit square, four labelled regions, 108 points.
    pub fn four_partitions() -> Self {
        GeneratorSpec {
            name: "4-partitions".into(),
            depth: 2,
            nodes: vec![
                node(&[1.0, 0.2], -0.6, 0.04),
                node(&[1.0, 0.0], -0.3, 0.04),
                node(&[1.0, 0.1], -0.8, 0.04),
            ],
            num_points: 108,
            bounds: vec![[0.0, 1.0], [0.0, 1.0]],
        }
    }

    /// Depth-3 ground truth with one pruned branch, six labelled regions, 96
    /// points.
    pub fn six_partitions() -> Self {
        GeneratorSpec {
            name: "6-partitions".into(),
            depth: 3,
            nodes: vec![
                node(&[1.0, 0.0], -0.5, 0.05),
                node(&[0.0, 1.0], -0.5, 0.05),
                node(&[0.0, 1.0], -0.5, 0.05),
                node(&[1.0, 0.5], -0.5, 0.04),
                node(&[1.0, -0.5], -0.2, 0.04),
                node(&[0.0, 0.0], 1.0, 0.0),
                node(&[-1.0, 0.3], 0.75, 0.04),
            ],
            num_points: 96,
            bounds: vec![[0.0, 1.0], [0.0, 1.0]],
        }
    }

    /// The ground truth as a classifier; routing it reproduces every label.
    pub fn ground_truth(&self) -> Result<TreeClassifier, DatasetError> {
        let n = self.bounds.len();
        Ok(TreeClassifier::new(
            TreeTopology::new(self.depth)?,
            self.nodes.iter().map(|nd| nd.w.clone()).collect(),
            self.nodes.iter().map(|nd| nd.b).collect(),
            (1..=n).map(|j| format!("x{j}")).collect(),
        )?)
    }

    fn in_band(&self, x: &[f64]) -> bool {
        self.nodes.iter().any(|nd| {
            let norm = nd.w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return false;
            }
            let h: f64 = nd.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + nd.b;
            (h / norm).abs() < nd.margin
        })
    }
}

fn node(w: &[f64], b: f64, margin: f64) -> GeneratorNode {
    GeneratorNode {
        w: w.to_vec(),
        b,
        margin,
    }
}

const GENERATOR_ATTEMPTS_PER_POINT: usize = 10_000;

/// Samples points uniformly in the box, rejecting those inside any margin
/// band, and labels them by routing through the ground-truth tree.
pub fn gen_partitions(spec: &GeneratorSpec, seed: u64) -> Result<Dataset, DatasetError> {
    if spec.bounds.is_empty() {
        return Err(DatasetError::Generator("bounding box has no dimensions".into()));
    }
    if spec.num_points == 0 {
        return Err(DatasetError::Generator("num_points must be positive".into()));
    }
    if spec.bounds.iter().any(|[lo, hi]| !(lo < hi)) {
        return Err(DatasetError::Generator("empty bounding box".into()));
    }
    if spec.nodes.iter().any(|nd| nd.margin < 0.0) {
        return Err(DatasetError::Generator("negative margin".into()));
    }
    let truth = spec.ground_truth()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(spec.num_points);
    let mut labels = Vec::with_capacity(spec.num_points);
    let mut attempts = 0;
    while features.len() < spec.num_points {
        attempts += 1;
        if attempts > GENERATOR_ATTEMPTS_PER_POINT * spec.num_points {
            return Err(DatasetError::Generator(
                "margin bands leave no room for points in the box".into(),
            ));
        }
        let x: Vec<f64> = spec
            .bounds
            .iter()
            .map(|&[lo, hi]| rng.gen_range(lo..hi))
            .collect();
        if spec.in_band(&x) {
            continue;
        }
        labels.push(truth.predict(&x)?);
        features.push(x);
    }
    let names = truth.feature_names().to_vec();
    Dataset::new(features, labels, names, format!("generator:{} seed={seed}", spec.name))
}
