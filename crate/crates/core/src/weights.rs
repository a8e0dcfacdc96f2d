//! Population-shared feature importance learned from accuracy changes, and
//! the weight-proportional sampler that turns it back into feature subsets.
//!
//! Every evaluation compares a particle's new mask and accuracy with its
//! previous ones. Features that entered the mask are credited with the
//! accuracy change and features that left it are debited by the same amount,
//! so a feature whose arrivals coincide with gains and whose departures
//! coincide with losses accumulates positive weight.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mask::FeatureMask;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureWeights(Vec<f64>);

impl FeatureWeights {
    /// All-zero weights for `n_features` features.
    pub fn zeros(n_features: usize) -> Self {
        FeatureWeights(vec![0.0; n_features])
    }

    pub fn from_vec(w: Vec<f64>) -> Self {
        FeatureWeights(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, n: usize) -> f64 {
        self.0[n]
    }

    /// Number of strictly positive weights.
    pub fn positive_count(&self) -> usize {
        self.0.iter().filter(|&&w| w > 0.0).count()
    }

    /// The `k` largest weights as `(feature, weight)`, heaviest first; ties
    /// go to the lower feature index.
    pub fn top(&self, k: usize) -> Vec<(usize, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.0.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}

/// Features that entered (`gained`) and left (`dropped`) the mask between two
/// consecutive evaluations of one particle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MaskDelta {
    pub gained: Vec<usize>,
    pub dropped: Vec<usize>,
}

impl MaskDelta {
    pub fn between(prev: &FeatureMask, next: &FeatureMask) -> Self {
        assert_eq!(prev.len(), next.len(), "masks must have equal length");
        let mut delta = MaskDelta::default();
        for (n, (&was, &is)) in prev.as_slice().iter().zip(next.as_slice()).enumerate() {
            match (was, is) {
                (false, true) => delta.gained.push(n),
                (true, false) => delta.dropped.push(n),
                _ => {}
            }
        }
        delta
    }

    pub fn is_empty(&self) -> bool {
        self.gained.is_empty() && self.dropped.is_empty()
    }
}

/// Credits gained features with `new_acc - prev_acc` and debits dropped
/// features by the same amount. Covers both the improving and the worsening
/// case, since the signed change carries the direction. No change when the
/// accuracies are equal; features in neither list are untouched.
pub fn update_weights(w: &mut FeatureWeights, delta: &MaskDelta, prev_acc: f64, new_acc: f64) {
    let change = new_acc - prev_acc;
    if change == 0.0 || change.is_nan() {
        return;
    }
    for &n in &delta.gained {
        w.0[n] += change;
    }
    for &n in &delta.dropped {
        w.0[n] -= change;
    }
}

/// Sum of the strictly positive weights.
pub fn positive_mass(w: &FeatureWeights) -> f64 {
    w.0.iter().filter(|&&x| x > 0.0).sum()
}

/// Selection probability per feature: `w[n] / positive_mass` for positive
/// weights, zero otherwise.
pub fn selection_probabilities(w: &FeatureWeights) -> Result<Vec<f64>> {
    let mass = positive_mass(w);
    if mass <= 0.0 {
        return Err(Error::NoPositiveMass);
    }
    Ok(w.0
        .iter()
        .map(|&x| if x > 0.0 { x / mass } else { 0.0 })
        .collect())
}

/// How many features a weight-guided particle picks per draw.
#[derive(Clone, Copy, Debug, PartialEq)]
#[derive(Default)]
pub enum SubsetPolicy {
    /// Subset size uniform on `1..=P` (P = number of positive weights),
    /// members drawn without replacement proportionally to weight.
    #[default]
    UniformCount,
    /// Each positive-weight feature included independently with probability
    /// `min(1, rho * P * scale)`; expected size is about `scale * P`.
    Bernoulli { scale: f64 },
}


/// Draws a nonempty feature subset guided by the weights. Features with
/// weight <= 0 are never chosen unless no weight is positive, in which case
/// a single uniformly random feature is returned.
pub fn roulette_sample<R: Rng + ?Sized>(
    w: &FeatureWeights,
    policy: SubsetPolicy,
    rng: &mut R,
) -> FeatureMask {
    let d = w.len();
    let positive: Vec<usize> = (0..d).filter(|&n| w.0[n] > 0.0).collect();
    if positive.is_empty() {
        return FeatureMask::from_indices(d, [rng.random_range(0..d)]);
    }
    match policy {
        SubsetPolicy::UniformCount => {
            let m = rng.random_range(1..=positive.len());
            FeatureMask::from_indices(d, weighted_without_replacement(w, &positive, m, rng))
        }
        SubsetPolicy::Bernoulli { scale } => {
            let mass = positive_mass(w);
            let p_count = positive.len() as f64;
            let chosen: Vec<usize> = positive
                .iter()
                .copied()
                .filter(|&n| {
                    let p = (w.0[n] / mass * p_count * scale).min(1.0);
                    rng.random::<f64>() < p
                })
                .collect();
            if chosen.is_empty() {
                FeatureMask::from_indices(d, weighted_without_replacement(w, &positive, 1, rng))
            } else {
                FeatureMask::from_indices(d, chosen)
            }
        }
    }
}

/// Weighted sampling of `m` distinct items without replacement, where each
/// successive pick is proportional to weight among the items still left.
/// Uses exponential keys `ln(u) / w` and keeps the `m` largest, which has the
/// same distribution as the sequential roulette but runs in O(P log P).
fn weighted_without_replacement<R: Rng + ?Sized>(
    w: &FeatureWeights,
    candidates: &[usize],
    m: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = candidates
        .iter()
        .map(|&n| {
            // 1 - u lies in (0, 1], so the log is finite
            let u = 1.0 - rng.random::<f64>();
            (u.ln() / w.0[n], n)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().take(m).map(|(_, n)| n).collect()
}
