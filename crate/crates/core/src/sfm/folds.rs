//! Deterministic balanced fold assignment for cross-fitting.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// K-fold partition of row indices. A pure function of `(n, k, seed)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    /// Rows belonging to fold `f`.
    pub fn fold_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == f).collect()
    }

    /// Rows outside fold `f` (the training complement).
    pub fn complement_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != f).collect()
    }
}

/// Permutation-based assignment: shuffle the rows, deal them round-robin.
/// Fold sizes differ by at most one.
pub fn assign_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::BadFoldCount { k, n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = seeded_rng(seed, b"folds", 0);
    perm.shuffle(&mut rng);
    let mut fold_of = vec![0usize; n];
    for (pos, &row) in perm.iter().enumerate() {
        fold_of[row] = pos % k;
    }
    Ok(FoldAssignment { k, fold_of, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fold_sizes(a: &FoldAssignment) -> Vec<usize> {
        let mut sizes = vec![0usize; a.k];
        for &f in &a.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    #[test]
    fn balanced_five_fold_split() {
        let a = assign_folds(10, 5, 7).unwrap();
        assert_eq!(fold_sizes(&a), vec![2; 5]);
    }

    #[test]
    fn leave_one_out() {
        let a = assign_folds(10, 10, 1).unwrap();
        assert_eq!(fold_sizes(&a), vec![1; 10]);
    }

    #[test]
    fn deterministic_given_inputs() {
        let a = assign_folds(123, 10, 42).unwrap();
        let b = assign_folds(123, 10, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_fold_counts() {
        assert!(matches!(assign_folds(10, 1, 0), Err(Error::BadFoldCount { .. })));
        assert!(matches!(assign_folds(10, 11, 0), Err(Error::BadFoldCount { .. })));
    }

    proptest! {
        #[test]
        fn sizes_differ_by_at_most_one(n in 2usize..200, k in 2usize..20, seed in 0u64..1000) {
            prop_assume!(k <= n);
            let a = assign_folds(n, k, seed).unwrap();
            let sizes = fold_sizes(&a);
            let max = sizes.iter().max().unwrap();
            let min = sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
        }

        #[test]
        fn pure_function_of_inputs(n in 2usize..100, seed in 0u64..1000) {
            let a = assign_folds(n, 2, seed).unwrap();
            let b = assign_folds(n, 2, seed).unwrap();
            prop_assert_eq!(a.fold_of, b.fold_of);
        }
    }
}
