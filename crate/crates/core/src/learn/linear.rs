//! Gradient-trained models: L2-regularised logistic regression, linear SVM
//! (hinge loss) and a one-hidden-layer perceptron with logistic units.
//!
//! Parameters are flat vectors so that the same loss/gradient code serves
//! training and finite-difference checks:
//!
//! * linear: `[w_0 .. w_{d-1}, b]`
//! * mlp: `[W1 (d x h, row per input feature), b1 (h), w2 (h), b2]`

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, ClassifierKind, ClassifierSpec, LearnError};
use crate::features::{DocMatrix, RowView};
use crate::seeded_rng;

/// Rows of a matrix used for one loss evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub x: &'a DocMatrix,
    pub y: &'a [bool],
    pub rows: &'a [usize],
}

impl<'a> Batch<'a> {
    pub fn new(x: &'a DocMatrix, y: &'a [bool], rows: &'a [usize]) -> Self {
        Self { x, y, rows }
    }
}

pub fn param_len(spec: &ClassifierSpec, n_features: usize) -> usize {
    match spec.kind {
        ClassifierKind::Mlp => n_features * spec.hidden_units + 2 * spec.hidden_units + 1,
        _ => n_features + 1,
    }
}

fn check_kind(spec: &ClassifierSpec) -> Result<(), LearnError> {
    if spec.kind.is_gradient_based() {
        Ok(())
    } else {
        Err(LearnError::InvalidSpec(format!("{} has no gradient", spec.kind)))
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// Regularised loss on the batch: mean data loss plus `λ/2 ‖weights‖²`
/// (biases are not penalised).
pub fn loss(spec: &ClassifierSpec, params: &[f64], batch: Batch<'_>) -> Result<f64, LearnError> {
    check_kind(spec)?;
    let d = batch.x.n_features();
    if params.len() != param_len(spec, d) {
        return Err(LearnError::DimensionMismatch {
            expected: param_len(spec, d),
            got: params.len(),
        });
    }
    let mut data = 0.0;
    for &i in batch.rows {
        let r = batch.x.row(i);
        let y = batch.y[i];
        data += match spec.kind {
            ClassifierKind::Logreg => {
                let z = r.dot(&params[..d]) + params[d];
                softplus(z) - if y { z } else { 0.0 }
            }
            ClassifierKind::LinearSvm => {
                let z = r.dot(&params[..d]) + params[d];
                (1.0 - sign(y) * z).max(0.0)
            }
            _ => {
                let view = MlpView::new(params, d, spec.hidden_units);
                let z = view.output_logit(&r).1;
                softplus(z) - if y { z } else { 0.0 }
            }
        };
    }
    if !batch.rows.is_empty() {
        data /= batch.rows.len() as f64;
    }
    let penalised: f64 = match spec.kind {
        ClassifierKind::Mlp => {
            let h = spec.hidden_units;
            let v = MlpView::new(params, d, h);
            v.w1.iter().chain(v.w2).map(|w| w * w).sum()
        }
        _ => params[..d].iter().map(|w| w * w).sum(),
    };
    Ok(data + 0.5 * spec.lambda * penalised)
}

/// Analytic gradient of [`loss`]. An empty batch has a zero data term.
pub fn loss_gradient(spec: &ClassifierSpec, params: &[f64], batch: Batch<'_>) -> Result<Vec<f64>, LearnError> {
    check_kind(spec)?;
    let d = batch.x.n_features();
    if params.len() != param_len(spec, d) {
        return Err(LearnError::DimensionMismatch {
            expected: param_len(spec, d),
            got: params.len(),
        });
    }
    let mut grad = vec![0.0; params.len()];
    let scale = if batch.rows.is_empty() {
        0.0
    } else {
        1.0 / batch.rows.len() as f64
    };
    match spec.kind {
        ClassifierKind::Logreg | ClassifierKind::LinearSvm => {
            for &i in batch.rows {
                let r = batch.x.row(i);
                let z = r.dot(&params[..d]) + params[d];
                let y = batch.y[i];
                let dz = if spec.kind == ClassifierKind::Logreg {
                    sigmoid(z) - if y { 1.0 } else { 0.0 }
                } else if sign(y) * z < 1.0 {
                    -sign(y)
                } else {
                    0.0
                };
                if dz != 0.0 {
                    for (j, v) in r.iter() {
                        grad[j] += scale * dz * v;
                    }
                    grad[d] += scale * dz;
                }
            }
            for j in 0..d {
                grad[j] += spec.lambda * params[j];
            }
        }
        _ => {
            let h = spec.hidden_units;
            let view = MlpView::new(params, d, h);
            let (b1_off, w2_off, b2_off) = (d * h, d * h + h, d * h + 2 * h);
            let mut delta_h = vec![0.0; h];
            for &i in batch.rows {
                let r = batch.x.row(i);
                let (hidden, z) = view.output_logit(&r);
                let dz = scale * (sigmoid(z) - if batch.y[i] { 1.0 } else { 0.0 });
                for k in 0..h {
                    grad[w2_off + k] += dz * hidden[k];
                    delta_h[k] = dz * view.w2[k] * hidden[k] * (1.0 - hidden[k]);
                    grad[b1_off + k] += delta_h[k];
                }
                grad[b2_off] += dz;
                for (j, v) in r.iter() {
                    let row = &mut grad[j * h..(j + 1) * h];
                    for k in 0..h {
                        row[k] += v * delta_h[k];
                    }
                }
            }
            for (g, w) in grad[..d * h].iter_mut().zip(view.w1) {
                *g += spec.lambda * w;
            }
            for (g, w) in grad[w2_off..w2_off + h].iter_mut().zip(view.w2) {
                *g += spec.lambda * w;
            }
        }
    }
    Ok(grad)
}

/// Mini-batch gradient descent. The linear models decay the learning rate
/// as `lr / (1 + epoch)`; the MLP keeps it constant.
pub(super) fn fit_sgd(
    x: &DocMatrix,
    y: &[bool],
    spec: &ClassifierSpec,
    mut params: Vec<f64>,
) -> Result<Vec<f64>, LearnError> {
    let mut rng = seeded_rng(spec.seed);
    let mut order: Vec<usize> = (0..y.len()).collect();
    for epoch in 0..spec.epochs {
        let lr = match spec.kind {
            ClassifierKind::Mlp => spec.learning_rate,
            _ => spec.learning_rate / (1.0 + epoch as f64),
        };
        order.shuffle(&mut rng);
        for chunk in order.chunks(spec.batch_size) {
            let g = loss_gradient(spec, &params, Batch::new(x, y, chunk))?;
            for (p, gi) in params.iter_mut().zip(&g) {
                *p -= lr * gi;
            }
        }
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(LearnError::InvalidSpec(format!(
            "{} diverged; lower the learning rate",
            spec.kind
        )));
    }
    Ok(params)
}

/// Glorot-uniform weights, zero biases.
pub(super) fn mlp_init(d: usize, h: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed ^ 0x4D4C_5000);
    let mut p = vec![0.0; d * h + 2 * h + 1];
    let a1 = (6.0 / (d + h) as f64).sqrt();
    for w in &mut p[..d * h] {
        *w = rng.gen_range(-a1..a1);
    }
    let a2 = (6.0 / (h + 1) as f64).sqrt();
    for w in &mut p[d * h + h..d * h + 2 * h] {
        *w = rng.gen_range(-a2..a2);
    }
    p
}

struct MlpView<'a> {
    w1: &'a [f64],
    b1: &'a [f64],
    w2: &'a [f64],
    b2: f64,
    h: usize,
}

impl<'a> MlpView<'a> {
    fn new(p: &'a [f64], d: usize, h: usize) -> Self {
        Self {
            w1: &p[..d * h],
            b1: &p[d * h..d * h + h],
            w2: &p[d * h + h..d * h + 2 * h],
            b2: p[d * h + 2 * h],
            h,
        }
    }

    fn output_logit(&self, r: &RowView<'_>) -> (Vec<f64>, f64) {
        let mut pre = self.b1.to_vec();
        for (j, v) in r.iter() {
            let row = &self.w1[j * self.h..(j + 1) * self.h];
            for (a, w) in pre.iter_mut().zip(row) {
                *a += v * w;
            }
        }
        let hidden: Vec<f64> = pre.into_iter().map(sigmoid).collect();
        let z = hidden.iter().zip(self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2;
        (hidden, z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub n_features: usize,
    pub hidden_units: usize,
    /// `n_features x hidden_units`, row per input feature
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpParams {
    pub(super) fn from_flat(p: &[f64], d: usize, h: usize) -> Self {
        let v = MlpView::new(p, d, h);
        Self {
            n_features: d,
            hidden_units: h,
            w1: v.w1.to_vec(),
            b1: v.b1.to_vec(),
            w2: v.w2.to_vec(),
            b2: v.b2,
        }
    }

    /// Hidden activations and output probability.
    pub fn forward(&self, r: &RowView<'_>) -> (Vec<f64>, f64) {
        let v = MlpView {
            w1: &self.w1,
            b1: &self.b1,
            w2: &self.w2,
            b2: self.b2,
            h: self.hidden_units,
        };
        let (hidden, z) = v.output_logit(r);
        (hidden, sigmoid(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Scheme;

    #[test]
    fn empty_batch_without_penalty_has_zero_gradient() {
        let x = DocMatrix::from_dense(&[vec![1.0, 2.0]], Scheme::Count);
        for kind in [ClassifierKind::Logreg, ClassifierKind::LinearSvm, ClassifierKind::Mlp] {
            let mut spec = ClassifierSpec::new(kind);
            spec.lambda = 0.0;
            spec.hidden_units = 3;
            let params = vec![0.3; param_len(&spec, 2)];
            let g = loss_gradient(&spec, &params, Batch::new(&x, &[true], &[])).unwrap();
            assert!(g.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn logreg_gradient_at_zero_has_closed_form() {
        // balanced ±1 labels with mirrored inputs: data gradient = -mean(y_i x_i) / 2
        let rows = vec![vec![1.0, 2.0], vec![-1.0, -2.0], vec![0.5, -1.0], vec![-0.5, 1.0]];
        let y = [true, false, true, false];
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let mut spec = ClassifierSpec::new(ClassifierKind::Logreg);
        spec.lambda = 0.0;
        let g = loss_gradient(&spec, &[0.0, 0.0, 0.0], Batch::new(&x, &y, &[0, 1, 2, 3])).unwrap();
        for j in 0..2 {
            let expected = -rows.iter().zip(&y).map(|(r, &yi)| sign(yi) * r[j]).sum::<f64>() / rows.len() as f64 / 2.0;
            assert!((g[j] - expected).abs() < 1e-12);
        }
        assert!(g[2].abs() < 1e-12);
    }

    #[test]
    fn non_gradient_kind_rejected() {
        let x = DocMatrix::from_dense(&[vec![1.0]], Scheme::Count);
        let spec = ClassifierSpec::new(ClassifierKind::Knn);
        assert!(loss_gradient(&spec, &[0.0, 0.0], Batch::new(&x, &[true], &[0])).is_err());
    }
}
