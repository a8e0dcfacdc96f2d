use std::fmt;

/// Binary feature-selection vector. `true` at index `n` means feature `n`
/// takes part in distance computations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FeatureMask(Vec<bool>);

impl FeatureMask {
    pub fn empty(len: usize) -> Self {
        FeatureMask(vec![false; len])
    }

    pub fn full(len: usize) -> Self {
        FeatureMask(vec![true; len])
    }

    /// Builds a mask of length `len` with exactly the given indices set.
    ///
    /// Panics if an index is out of range.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; len];
        for i in indices {
            bits[i] = true;
        }
        FeatureMask(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of selected features.
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_selected(&self, index: usize) -> bool {
        self.0[index]
    }

    pub fn set(&mut self, index: usize, selected: bool) {
        self.0[index] = selected;
    }

    /// Selected feature indices in ascending order.
    pub fn indices(&self) -> Vec<usize> {
        self.iter_selected().collect()
    }

    pub fn iter_selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for FeatureMask {
    fn from(bits: Vec<bool>) -> Self {
        FeatureMask(bits)
    }
}

impl fmt::Debug for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FeatureMask(len={}, selected={:?})",
            self.len(),
            self.indices()
        )
    }
}
