use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::rng;

/// Disjoint test folds covering `0..n`. Indices within a fold are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.assignments[fold]
    }

    /// All rows not in `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .assignments
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != fold)
            .flat_map(|(_, a)| a.iter().copied())
            .collect();
        idx.sort_unstable();
        idx
    }

    pub fn n_rows(&self) -> usize {
        self.assignments.iter().map(Vec::len).sum()
    }
}

/// Seeded shuffle, then contiguous partition: the first `n mod k` folds get
/// `⌈n/k⌉` rows, the rest `⌊n/k⌋`.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
    if k < 2 || k > n {
        return Err(DataError::InvalidK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::from_seed(seed));
    let (base, extra) = (n / k, n % k);
    let mut assignments = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        assignments.push(fold);
        start += size;
    }
    Ok(FoldPlan { k, seed, assignments })
}
