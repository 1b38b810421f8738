//! Gaussian and multinomial naive Bayes. Scores are log-odds of design.

use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::features::{DocMatrix, RowView};

/// Index 0 is general, 1 is design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbParams {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
    /// Log-likelihood of the all-zero row per class; sparse rows adjust it.
    base: [f64; 2],
}

impl GaussianNbParams {
    fn class_ll(&self, c: usize, r: &RowView<'_>) -> f64 {
        let mut ll = self.base[c];
        for (j, v) in r.iter() {
            let (m, var) = (self.mean[c][j], self.var[c][j]);
            ll += (m * m - (v - m) * (v - m)) / (2.0 * var);
        }
        ll
    }

    pub fn log_odds(&self, r: &RowView<'_>) -> f64 {
        (self.log_prior[1] + self.class_ll(1, r)) - (self.log_prior[0] + self.class_ll(0, r))
    }
}

pub(super) fn fit_gaussian(x: &DocMatrix, y: &[bool], var_floor: f64) -> GaussianNbParams {
    let d = x.n_features();
    let mut n = [0usize; 2];
    let mut sum = [vec![0.0; d], vec![0.0; d]];
    let mut sq = [vec![0.0; d], vec![0.0; d]];
    for (r, &yi) in x.rows().zip(y) {
        let c = usize::from(yi);
        n[c] += 1;
        for (j, v) in r.iter() {
            sum[c][j] += v;
            sq[c][j] += v * v;
        }
    }
    let total = y.len() as f64;
    let mut mean = [vec![0.0; d], vec![0.0; d]];
    let mut var = [vec![0.0; d], vec![0.0; d]];
    let mut base = [0.0; 2];
    let mut log_prior = [0.0; 2];
    for c in 0..2 {
        let nc = n[c] as f64;
        log_prior[c] = (nc / total).ln();
        for j in 0..d {
            let m = sum[c][j] / nc;
            let v = (sq[c][j] / nc - m * m).max(0.0).max(var_floor);
            mean[c][j] = m;
            var[c][j] = v;
            base[c] += -0.5 * (2.0 * std::f64::consts::PI * v).ln() - m * m / (2.0 * v);
        }
    }
    GaussianNbParams {
        log_prior,
        mean,
        var,
        base,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNbParams {
    pub log_prior: [f64; 2],
    /// Laplace-smoothed log feature probabilities per class.
    pub log_prob: [Vec<f64>; 2],
}

impl MultinomialNbParams {
    pub fn log_odds(&self, r: &RowView<'_>) -> f64 {
        let mut s = self.log_prior[1] - self.log_prior[0];
        for (j, v) in r.iter() {
            s += v * (self.log_prob[1][j] - self.log_prob[0][j]);
        }
        s
    }
}

pub(super) fn fit_multinomial(x: &DocMatrix, y: &[bool], alpha: f64) -> Result<MultinomialNbParams, LearnError> {
    let d = x.n_features();
    let mut n = [0usize; 2];
    let mut counts = [vec![0.0; d], vec![0.0; d]];
    for (row, (r, &yi)) in x.rows().zip(y).enumerate() {
        let c = usize::from(yi);
        n[c] += 1;
        for (j, v) in r.iter() {
            if v < 0.0 {
                return Err(LearnError::NegativeFeature { row, col: j });
            }
            counts[c][j] += v;
        }
    }
    let total = y.len() as f64;
    let mut log_prob = [vec![0.0; d], vec![0.0; d]];
    let mut log_prior = [0.0; 2];
    for c in 0..2 {
        log_prior[c] = (n[c] as f64 / total).ln();
        let denom = counts[c].iter().sum::<f64>() + alpha * d as f64;
        for j in 0..d {
            log_prob[c][j] = ((counts[c][j] + alpha) / denom).ln();
        }
    }
    Ok(MultinomialNbParams { log_prior, log_prob })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Scheme;

    /// Dense log-density sum, written independently of the sparse shortcut.
    fn dense_log_odds(p: &GaussianNbParams, row: &[f64]) -> f64 {
        let ll = |c: usize| {
            p.log_prior[c]
                + row
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let (m, s2) = (p.mean[c][j], p.var[c][j]);
                        -0.5 * (2.0 * std::f64::consts::PI * s2).ln() - (v - m).powi(2) / (2.0 * s2)
                    })
                    .sum::<f64>()
        };
        ll(1) - ll(0)
    }

    #[test]
    fn sparse_gaussian_matches_dense_density() {
        let rows = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.5, 0.0, 2.0],
            vec![0.3, 0.2, 0.0],
            vec![2.0, 2.5, 0.1],
            vec![0.0, 0.0, 0.0],
        ];
        let y = [true, true, false, false, true];
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let p = fit_gaussian(&x, &y, 1e-9);
        for (i, r) in rows.iter().enumerate() {
            let a = p.log_odds(&x.row(i));
            let b = dense_log_odds(&p, r);
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn constant_feature_uses_variance_floor() {
        let x = DocMatrix::from_dense(&[vec![1.0, 3.0], vec![2.0, 3.0]], Scheme::Count);
        let p = fit_gaussian(&x, &[true, false], 1e-9);
        assert_eq!(p.var[0][1], 1e-9);
        assert!(p.log_odds(&x.row(0)).is_finite());
    }

    #[test]
    fn multinomial_rejects_negative_counts() {
        let x = DocMatrix::from_dense(&[vec![1.0, -1.0], vec![2.0, 0.0]], Scheme::Count);
        assert!(matches!(
            fit_multinomial(&x, &[true, false], 1.0),
            Err(LearnError::NegativeFeature { row: 0, col: 1 })
        ));
    }

    #[test]
    fn multinomial_laplace_smoothing() {
        let x = DocMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 1.0]], Scheme::Count);
        let p = fit_multinomial(&x, &[true, false], 1.0).unwrap();
        assert!((p.log_prob[1][0] - (3.0f64 / 4.0).ln()).abs() < 1e-12);
        assert!((p.log_prob[1][1] - (1.0f64 / 4.0).ln()).abs() < 1e-12);
        assert!((p.log_prob[0][1] - (2.0f64 / 3.0).ln()).abs() < 1e-12);
    }
}
