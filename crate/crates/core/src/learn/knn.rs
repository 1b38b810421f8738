use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::DocMatrix;

/// Stored exemplars for Euclidean k-nearest-neighbour voting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub exemplars: DocMatrix,
    pub labels: Vec<bool>,
    pub k: usize,
}

impl KnnParams {
    /// Fraction of design among the `k` nearest exemplars. Equal distances
    /// go to the lower exemplar index.
    pub fn scores(&self, x: &DocMatrix) -> Vec<f64> {
        let k = self.k.min(self.labels.len()).max(1);
        (0..x.n_rows())
            .into_par_iter()
            .map(|i| {
                let q = x.row(i);
                let mut dist: Vec<(f64, usize)> = self
                    .exemplars
                    .rows()
                    .enumerate()
                    .map(|(e, r)| (q.squared_distance(&r), e))
                    .collect();
                let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if k < dist.len() {
                    dist.select_nth_unstable_by(k - 1, by);
                    dist.truncate(k);
                }
                dist.iter().filter(|(_, e)| self.labels[*e]).count() as f64 / k as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Scheme;

    #[test]
    fn one_neighbour_reproduces_training_labels() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let labels: Vec<bool> = (0..12).map(|i| i % 3 == 0).collect();
        let p = KnnParams {
            exemplars: DocMatrix::from_dense(&rows, Scheme::Count),
            labels: labels.clone(),
            k: 1,
        };
        let scores = p.scores(&p.exemplars);
        assert_eq!(scores.iter().map(|&s| s == 1.0).collect::<Vec<_>>(), labels);
    }

    #[test]
    fn three_neighbour_scores_are_thirds() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels: Vec<bool> = (0..10).map(|i| i < 4).collect();
        let p = KnnParams {
            exemplars: DocMatrix::from_dense(&rows, Scheme::Count),
            labels,
            k: 3,
        };
        for s in p.scores(&p.exemplars) {
            assert!([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0].iter().any(|v| (s - v).abs() < 1e-12));
        }
    }

    #[test]
    fn ties_go_to_lower_index() {
        let rows = vec![vec![1.0], vec![-1.0]];
        let p = KnnParams {
            exemplars: DocMatrix::from_dense(&rows, Scheme::Count),
            labels: vec![true, false],
            k: 1,
        };
        let q = DocMatrix::from_dense(&[vec![0.0]], Scheme::Count);
        assert_eq!(p.scores(&q), vec![1.0]);
    }
}
