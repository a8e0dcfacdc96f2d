//! Synthetic classification data with known informative features.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::Result;

/// Two balanced classes; every feature is standard normal noise, except the
/// planted ones whose mean is shifted by `+shift` for class 1 and `-shift`
/// for class 0. The signal is additive, so each planted feature is
/// informative on its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantedSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_informative: usize,
    pub shift: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            n_samples: 200,
            n_features: 500,
            n_informative: 5,
            shift: 1.0,
            seed: 0,
        }
    }
}

/// Generates the dataset and returns it with the planted feature indices
/// (ascending).
pub fn planted(spec: &PlantedSpec) -> Result<(Dataset, Vec<usize>)> {
    assert!(spec.n_informative <= spec.n_features);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut informative = sample(&mut rng, spec.n_features, spec.n_informative).into_vec();
    informative.sort_unstable();
    let mut is_informative = vec![false; spec.n_features];
    for &j in &informative {
        is_informative[j] = true;
    }

    let labels: Vec<usize> = (0..spec.n_samples).map(|i| i % 2).collect();
    let mut samples = Vec::with_capacity(spec.n_samples * spec.n_features);
    for &label in &labels {
        let sign = if label == 1 { 1.0 } else { -1.0 };
        for &planted in &is_informative {
            let noise: f64 = StandardNormal.sample(&mut rng);
            samples.push(if planted {
                noise + sign * spec.shift
            } else {
                noise
            });
        }
    }
    Ok((Dataset::new(samples, spec.n_features, labels)?, informative))
}
