use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    /// Fold of each sample.
    pub fold: Vec<usize>,
    pub k: usize,
}

impl FoldAssignment {
    /// (train, test) row indices for fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.fold.len()).partition(|&i| self.fold[i] != f)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.fold {
            s[f] += 1;
        }
        s
    }
}

/// Shuffles each class and deals its members round-robin. The negatives start
/// where the positives stopped so fold sizes also stay within one.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64, allow_small: bool) -> Result<FoldAssignment, LearnError> {
    if k < 2 {
        return Err(LearnError::InvalidFolds(format!("k must be at least 2, got {k}")));
    }
    let mut rng = seeded_rng(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if !allow_small && (pos.len() < k || neg.len() < k) {
        return Err(LearnError::InvalidFolds(format!(
            "{} design and {} general samples cannot fill {k} folds",
            pos.len(),
            neg.len()
        )));
    }
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold = vec![0; labels.len()];
    for (n, &i) in pos.iter().chain(&neg).enumerate() {
        fold[i] = n % k;
    }
    Ok(FoldAssignment { fold, k })
}

/// Unstratified folds over a seeded shuffle.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<FoldAssignment, LearnError> {
    if k < 2 || k > n {
        return Err(LearnError::InvalidFolds(format!(
            "cannot split {n} samples into {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut fold = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        fold[i] = p % k;
    }
    Ok(FoldAssignment { fold, k })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos_counts(labels: &[bool], a: &FoldAssignment) -> Vec<usize> {
        let mut c = vec![0; a.k];
        for (i, &f) in a.fold.iter().enumerate() {
            c[f] += usize::from(labels[i]);
        }
        c
    }

    #[test]
    fn twenty_in_a_hundred() {
        let labels: Vec<bool> = (0..100).map(|i| i % 5 == 0).collect();
        let a = stratified_kfold(&labels, 10, 42, false).unwrap();
        assert_eq!(pos_counts(&labels, &a), vec![2; 10]);
        assert_eq!(a.fold_sizes(), vec![10; 10]);
    }

    #[test]
    fn two_samples_two_folds() {
        let a = stratified_kfold(&[true, false], 2, 0, true).unwrap();
        assert_ne!(a.fold[0], a.fold[1]);
    }

    #[test]
    fn twenty_one_positives() {
        let labels: Vec<bool> = (0..100).map(|i| i < 21).collect();
        let c = pos_counts(&labels, &stratified_kfold(&labels, 10, 7, false).unwrap());
        assert_eq!(c.iter().sum::<usize>(), 21);
        assert!(c.iter().all(|&v| v == 2 || v == 3));
    }

    #[test]
    fn small_class_needs_flag() {
        let labels = [true, false, false, false];
        assert!(stratified_kfold(&labels, 3, 0, false).is_err());
        assert!(stratified_kfold(&labels, 3, 0, true).is_ok());
        assert!(stratified_kfold(&labels, 1, 0, true).is_err());
    }

    #[test]
    fn plain_kfold_covers_everything() {
        let a = kfold(23, 5, 1).unwrap();
        let s = a.fold_sizes();
        assert_eq!(s.iter().sum::<usize>(), 23);
        assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
    }
}
