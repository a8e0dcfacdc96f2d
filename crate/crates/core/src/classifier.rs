//! K-nearest-neighbour classification over a feature mask, and the
//! cross-validated accuracy used as the wrapper fitness signal.
//!
//! Distances are squared Euclidean over the selected coordinates. Among equal
//! distances the lower training-row index wins; among equal vote counts the
//! smaller class id wins. Both rules are fixed so that runs reproduce bit for
//! bit.

use crate::dataset::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;

/// Result of evaluating one feature mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOutcome {
    pub accuracy: f64,
    pub error_rate: f64,
    pub n_selected: usize,
    pub fitness: f64,
}

/// Predicts the class of `query` from `train_rows` by majority vote of the
/// `k` nearest rows. Only coordinates selected by `mask` contribute.
pub fn knn_predict(
    train_rows: &[&[f64]],
    train_labels: &[usize],
    query: &[f64],
    mask: &FeatureMask,
    k: usize,
) -> Result<usize> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if train_rows.is_empty() || train_rows.len() != train_labels.len() {
        return Err(Error::Dataset(
            "training set must be nonempty with one label per row".into(),
        ));
    }
    let selected = mask.indices();
    if selected.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n_classes = train_labels.iter().max().map_or(0, |&m| m + 1);
    let q: Vec<f64> = selected.iter().map(|&j| query[j]).collect();
    let mut buf = vec![0.0; selected.len()];
    let mut nearest = Nearest::new(k);
    for (row, &label) in train_rows.iter().zip(train_labels) {
        for (slot, &j) in buf.iter_mut().zip(&selected) {
            *slot = row[j];
        }
        nearest.offer(squared_distance(&buf, &q), label);
    }
    Ok(nearest.vote(n_classes))
}

/// Pooled cross-validated accuracy: total correct held-out predictions over
/// all folds divided by the sample count.
pub fn cv_accuracy(ds: &Dataset, mask: &FeatureMask, plan: &FoldPlan, k_nn: usize) -> Result<f64> {
    let folds = cv_fold_counts(ds, mask, plan, k_nn)?;
    let correct: usize = folds.iter().map(|f| f.correct).sum();
    Ok(correct as f64 / ds.n_samples() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldCount {
    pub correct: usize,
    pub size: usize,
}

/// Per-fold correct/total counts, in fold order.
pub fn cv_fold_counts(
    ds: &Dataset,
    mask: &FeatureMask,
    plan: &FoldPlan,
    k_nn: usize,
) -> Result<Vec<FoldCount>> {
    if k_nn == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if mask.len() != ds.n_features() {
        return Err(Error::Dataset(format!(
            "mask has {} entries but dataset has {} features",
            mask.len(),
            ds.n_features()
        )));
    }
    if plan.assignment().len() != ds.n_samples() {
        return Err(Error::Dataset(
            "fold plan was built for another dataset".into(),
        ));
    }
    let selected = mask.indices();
    if selected.is_empty() {
        return Err(Error::EmptyMask);
    }

    let n = ds.n_samples();
    let dist = PairwiseDistances::compute(ds, &selected);
    let labels = ds.labels();
    let n_classes = ds.n_classes();
    let mut counts = vec![
        FoldCount {
            correct: 0,
            size: 0
        };
        plan.k()
    ];

    for query in 0..n {
        let fold = plan.fold_of(query);
        let mut nearest = Nearest::new(k_nn);
        for train in (0..n).filter(|&t| plan.fold_of(t) != fold) {
            nearest.offer(dist.get(query, train), labels[train]);
        }
        let slot = &mut counts[fold];
        slot.size += 1;
        if nearest.is_empty() {
            continue;
        }
        if nearest.vote(n_classes) == labels[query] {
            slot.correct += 1;
        }
    }
    Ok(counts)
}

/// Symmetric matrix of squared distances over the selected columns.
struct PairwiseDistances {
    n: usize,
    values: Vec<f64>,
}

impl PairwiseDistances {
    fn compute(ds: &Dataset, selected: &[usize]) -> Self {
        let n = ds.n_samples();
        let m = selected.len();
        // gather the masked columns contiguously so the inner loop is dense
        let mut packed = Vec::with_capacity(n * m);
        for i in 0..n {
            let row = ds.row(i);
            packed.extend(selected.iter().map(|&j| row[j]));
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            let a = &packed[i * m..(i + 1) * m];
            for j in (i + 1)..n {
                let b = &packed[j * m..(j + 1) * m];
                let d = squared_distance(a, b);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        PairwiseDistances { n, values }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for l in 0..4 {
            let d = ca[l] - cb[l];
            acc[l] += d * d;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Bounded buffer of the k best (distance, label) pairs seen so far. Rows
/// must be offered in ascending row order: a later row never displaces an
/// earlier one at equal distance.
struct Nearest {
    k: usize,
    best: Vec<(f64, usize)>,
}

impl Nearest {
    fn new(k: usize) -> Self {
        Nearest {
            k,
            best: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn offer(&mut self, dist: f64, label: usize) {
        if self.best.len() == self.k && dist >= self.best[self.k - 1].0 {
            return;
        }
        // insert after every entry with distance <= dist
        let pos = self.best.partition_point(|&(d, _)| d <= dist);
        self.best.insert(pos, (dist, label));
        self.best.truncate(self.k);
    }

    fn is_empty(&self) -> bool {
        self.best.is_empty()
    }

    fn vote(&self, n_classes: usize) -> usize {
        let mut votes = vec![0usize; n_classes.max(1)];
        for &(_, label) in &self.best {
            votes[label] += 1;
        }
        // first maximum = smallest class id among ties
        let mut winner = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[winner] {
                winner = c;
            }
        }
        winner
    }
}
