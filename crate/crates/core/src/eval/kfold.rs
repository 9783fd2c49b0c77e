//! Cross-validation fold construction.

use crate::domain::ZoneStatus;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FoldError {
    #[error("cannot split {n} samples into {k} folds")]
    TooFewSamples { n: usize, k: usize },
}

/// Random disjoint index blocks of sizes differing by at most one.
///
/// The shuffle is seeded, so the same (n, k, seed) always yields the same
/// blocks.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, FoldError> {
    if k == 0 || n < k {
        return Err(FoldError::TooFewSamples { n, k });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    Ok(chunk_balanced(&indices, k))
}

/// Stratified variant: closures and openings are shuffled separately and
/// dealt round-robin, keeping the class ratio near-equal across folds.
/// Useful for zones where closures are rare enough that plain random folds
/// can end up without a single positive.
pub fn stratified_kfold_split(
    labels: &[ZoneStatus],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, FoldError> {
    let n = labels.len();
    if k == 0 || n < k {
        return Err(FoldError::TooFewSamples { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut closed: Vec<usize> = (0..n).filter(|&i| labels[i].is_closed()).collect();
    let mut open: Vec<usize> = (0..n).filter(|&i| !labels[i].is_closed()).collect();
    closed.shuffle(&mut rng);
    open.shuffle(&mut rng);

    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, idx) in closed.into_iter().chain(open).enumerate() {
        folds[pos % k].push(idx);
    }
    Ok(folds)
}

fn chunk_balanced(indices: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = indices.len();
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        folds.push(indices[start..start + size].to_vec());
        start += size;
    }
    folds
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn assert_valid_folds(folds: &[Vec<usize>], n: usize) {
        let mut seen = BTreeSet::new();
        for fold in folds {
            for &i in fold {
                assert!(seen.insert(i), "index {i} appears twice");
            }
        }
        assert_eq!(seen.len(), n, "folds must cover 0..n");
        assert_eq!(*seen.iter().next_back().unwrap(), n - 1);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        let max = sizes.iter().max().unwrap();
        let min = sizes.iter().min().unwrap();
        assert!(max - min <= 1, "sizes unbalanced: {sizes:?}");
    }

    #[test]
    fn paper_scale_split_shape() {
        // 175 = 5*18 + 5*17
        let folds = kfold_split(175, 10, 42).unwrap();
        assert_valid_folds(&folds, 175);
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![17, 17, 17, 17, 17, 18, 18, 18, 18, 18]);
    }

    #[test]
    fn singleton_folds() {
        let folds = kfold_split(10, 10, 1).unwrap();
        assert_valid_folds(&folds, 10);
        assert!(folds.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        assert_eq!(kfold_split(57, 10, 7).unwrap(), kfold_split(57, 10, 7).unwrap());
        assert_ne!(kfold_split(57, 10, 7).unwrap(), kfold_split(57, 10, 8).unwrap());
    }

    #[test]
    fn invariants_across_sizes_and_seeds() {
        for &n in &[10usize, 57, 175, 783] {
            for seed in 0..10u64 {
                let folds = kfold_split(n, 10, seed).unwrap();
                assert_valid_folds(&folds, n);
            }
        }
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert_eq!(kfold_split(5, 10, 0), Err(FoldError::TooFewSamples { n: 5, k: 10 }));
    }

    #[test]
    fn stratified_keeps_positives_spread() {
        // 20 closures among 100 samples: every fold gets exactly 2.
        let labels: Vec<ZoneStatus> = (0..100)
            .map(|i| if i % 5 == 0 { ZoneStatus::Closed } else { ZoneStatus::Open })
            .collect();
        let folds = stratified_kfold_split(&labels, 10, 3).unwrap();
        assert_valid_folds(&folds, 100);
        for fold in &folds {
            let pos = fold.iter().filter(|&&i| labels[i].is_closed()).count();
            assert_eq!(pos, 2);
        }
    }
}
