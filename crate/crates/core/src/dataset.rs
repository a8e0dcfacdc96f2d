//! Tabular classification data and cross-validation fold plans.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Which CSV column carries the class label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LabelColumn {
    First,
    #[default]
    Last,
}

impl FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "first" => Ok(LabelColumn::First),
            "last" => Ok(LabelColumn::Last),
            other => Err(format!(
                "label column must be `first` or `last`, got `{other}`"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    /// Skip the first row.
    pub has_header: bool,
}

/// Immutable sample matrix (row-major) with dense integer class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    samples: Vec<f64>,
    labels: Vec<usize>,
    n_samples: usize,
    n_features: usize,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row-major samples. Labels must already be dense
    /// ids `0..C`; class names default to the id's decimal form.
    pub fn new(samples: Vec<f64>, n_features: usize, labels: Vec<usize>) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        Self::with_class_names(samples, n_features, labels, names)
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n_features) {
            return Err(Error::Dataset(format!(
                "row {i} has {} features, expected {n_features}",
                rows[i].len()
            )));
        }
        Self::new(rows.concat(), n_features, labels)
    }

    fn with_class_names(
        samples: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::Dataset("dataset needs at least one feature".into()));
        }
        if labels.is_empty() {
            return Err(Error::Dataset("dataset needs at least one sample".into()));
        }
        if samples.len() != labels.len() * n_features {
            return Err(Error::Dataset(format!(
                "{} values do not form {} rows of {n_features} features",
                samples.len(),
                labels.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dataset(format!(
                "non-finite value at row {}, feature {}",
                pos / n_features,
                pos % n_features
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Dataset(format!("label {bad} has no class name")));
        }
        Ok(Dataset {
            n_samples: labels.len(),
            samples,
            labels,
            n_features,
            class_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Sorted distinct label ids.
    pub fn class_ids(&self) -> Vec<usize> {
        let mut ids = self.labels.clone();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Original label strings, indexed by class id.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Reads a comma-separated file. Labels are re-encoded as `0..C` in order of
/// first appearance; feature order is preserved.
pub fn load_csv(path: impl AsRef<Path>, opts: CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut width = None;

    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                path: path.to_path_buf(),
                row,
                message: e.to_string(),
            }
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            message,
        };
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_err(format!(
                "expected {expected} columns, found {}",
                record.len()
            )));
        }
        if expected < 2 {
            return Err(parse_err(
                "need a label column and at least one feature".into(),
            ));
        }

        let (label, features) = match opts.label_column {
            LabelColumn::First => (&record[0], 1..expected),
            LabelColumn::Last => (&record[expected - 1], 0..expected - 1),
        };
        if label.is_empty() {
            return Err(parse_err("empty label".into()));
        }
        let next_id = class_index.len();
        let id = *class_index.entry(label.to_string()).or_insert_with(|| {
            class_names.push(label.to_string());
            next_id
        });
        labels.push(id);

        for col in features {
            let cell = &record[col];
            let value: f64 = cell
                .parse()
                .map_err(|_| parse_err(format!("column {}: `{cell}` is not a number", col + 1)))?;
            if !value.is_finite() {
                return Err(parse_err(format!("column {}: non-finite value", col + 1)));
            }
            samples.push(value);
        }
    }

    let Some(width) = width else {
        return Err(Error::EmptyFile(path.to_path_buf()));
    };
    Dataset::with_class_names(samples, width - 1, labels, class_names)
}

/// Maps every feature column onto [0, 1]. Constant columns become 0.
pub fn minmax_scale(ds: &Dataset) -> Dataset {
    let d = ds.n_features;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in ds.samples.chunks_exact(d) {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let mut samples = ds.samples.clone();
    for row in samples.chunks_exact_mut(d) {
        for (j, v) in row.iter_mut().enumerate() {
            let span = hi[j] - lo[j];
            *v = if span > 0.0 { (*v - lo[j]) / span } else { 0.0 };
        }
    }
    Dataset {
        samples,
        ..ds.clone()
    }
}

/// Assignment of every sample row to one of `k` cross-validation folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold index per sample row.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn fold_of(&self, row: usize) -> usize {
        self.assignment[row]
    }

    /// Row indices held out in `fold`, ascending.
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold split: each class is shuffled and dealt round-robin,
/// with the dealing position carried over from one class to the next so
/// that small classes do not all pile into the first folds.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > ds.n_samples {
        return Err(Error::FoldCount {
            k,
            n_samples: ds.n_samples,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
    for (i, &l) in ds.labels.iter().enumerate() {
        by_class[l].push(i);
    }

    let mut assignment = vec![0; ds.n_samples];
    let mut next_fold = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for row in members {
            assignment[row] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignment,
        seed,
    })
}
