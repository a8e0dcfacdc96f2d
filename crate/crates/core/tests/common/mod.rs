//! Reference implementations used as independent oracles. None of these
//! call into the library's classifier or weight code.

#![allow(dead_code)]

use melfs::dataset::{Dataset, FoldPlan};
use melfs::FeatureMask;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sort-all-distances KNN: plain sequential distance sum, full stable sort
/// by (distance, row), first-maximum vote.
pub fn brute_knn(
    rows: &[Vec<f64>],
    labels: &[usize],
    query: &[f64],
    mask: &[bool],
    k: usize,
) -> usize {
    let mut dist: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut d = 0.0;
            for j in 0..r.len() {
                if mask[j] {
                    d += (r[j] - query[j]).powi(2);
                }
            }
            (d, i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut votes = vec![0; n_classes];
    for &(_, i) in dist.iter().take(k) {
        votes[labels[i]] += 1;
    }
    let top = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == top).unwrap()
}

/// Cross-validation written out fold by fold from the raw assignment.
pub fn brute_cv(ds: &Dataset, mask: &FeatureMask, plan: &FoldPlan, k: usize) -> f64 {
    let n = ds.n_samples();
    let mut correct = 0usize;
    for fold in 0..plan.k() {
        let train: Vec<usize> = (0..n).filter(|&i| plan.assignment()[i] != fold).collect();
        let rows: Vec<Vec<f64>> = train.iter().map(|&i| ds.row(i).to_vec()).collect();
        let labels: Vec<usize> = train.iter().map(|&i| ds.labels()[i]).collect();
        for q in (0..n).filter(|&i| plan.assignment()[i] == fold) {
            if brute_knn(&rows, &labels, ds.row(q), mask.as_slice(), k) == ds.labels()[q] {
                correct += 1;
            }
        }
    }
    correct as f64 / n as f64
}

/// Weight update transcribed case by case: improvement (case 1) and
/// decline (case 2), no action when equal.
pub fn transcribed_update(
    w: &mut [f64],
    gained: &[usize],
    dropped: &[usize],
    acc_prev: f64,
    acc_now: f64,
) {
    if acc_now > acc_prev {
        for &n in gained {
            w[n] += acc_now - acc_prev;
        }
        for &n in dropped {
            w[n] -= acc_now - acc_prev;
        }
    } else if acc_now < acc_prev {
        for &n in gained {
            w[n] -= acc_prev - acc_now;
        }
        for &n in dropped {
            w[n] += acc_prev - acc_now;
        }
    }
}

/// Probability vector computed by hand: positive mass, then division.
pub fn hand_rho(w: &[f64]) -> Vec<f64> {
    let mut delta = 0.0;
    for &x in w {
        if x > 0.0 {
            delta += x;
        }
    }
    w.iter()
        .map(|&x| if x > 0.0 { x / delta } else { 0.0 })
        .collect()
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, n_classes: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect())
        .collect();
    // every class present at least once
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            if i < n_classes {
                i
            } else {
                rng.random_range(0..n_classes)
            }
        })
        .collect();
    Dataset::from_rows(&rows, labels).unwrap()
}

pub fn random_nonempty_mask(rng: &mut ChaCha8Rng, d: usize) -> FeatureMask {
    loop {
        let m: FeatureMask = (0..d)
            .map(|_| rng.random_bool(0.5))
            .collect::<Vec<_>>()
            .into();
        if m.count() > 0 {
            return m;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
