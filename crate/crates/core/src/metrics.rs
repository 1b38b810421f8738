//! Evaluation: confusion-matrix metrics, rank-based AUC, the Mann-Whitney U
//! test, and the study harness (cross-dataset matrices, fold evaluation,
//! n-gram overlap and training-size sweeps). Design is the positive class.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::corpus::Dataset;
use crate::features::top_ngrams;
use crate::learn::{ClassifierSpec, FoldAssignment};
use crate::protocol::{stratified_holdout, stratified_subsample, Evaluation, PreparedProtocol, ProtocolError};
use crate::rng::derive_seed;
use crate::textproc::TokenSeq;

pub const POSITIVE_CLASS: &str = "design";

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("labels contain a single class")]
    SingleClass,
    #[error("non-finite score at index {0}")]
    NonFinite(usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(truth: &[bool], predicted: &[bool]) -> Result<ConfusionMatrix, MetricsError> {
    if truth.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch(truth.len(), predicted.len()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub positive_class: String,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub mcc: f64,
    pub auc: Option<f64>,
    pub confusion: ConfusionMatrix,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Standard threshold metrics. A zero denominator makes that metric 0.
pub fn classification_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport, MetricsError> {
    if cm.total() == 0 {
        return Err(MetricsError::Empty);
    }
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let specificity = ratio(cm.tn, cm.tn + cm.fp);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let (tp, fp, tn, fn_) = (cm.tp as f64, cm.fp as f64, cm.tn as f64, cm.fn_ as f64);
    let denom = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let mcc = if denom == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / denom
    };
    Ok(MetricsReport {
        positive_class: POSITIVE_CLASS.into(),
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        balanced_accuracy: (recall + specificity) / 2.0,
        precision,
        recall,
        specificity,
        f1,
        mcc,
        auc: None,
        confusion: *cm,
    })
}

/// Ranks starting at 1, tied values sharing their mean rank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn check_finite(v: &[f64]) -> Result<(), MetricsError> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(MetricsError::NonFinite(i)),
        None => Ok(()),
    }
}

/// Probability that a random design sample outscores a random general one,
/// ties counting one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), labels.len()));
    }
    check_finite(scores)?;
    let n_pos = labels.iter().filter(|&&b| b).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let ranks = midranks(scores);
    let r_pos: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = r_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UTestMethod {
    /// Exact when `n·m <= 400` and there are no ties, normal otherwise.
    Auto,
    Exact,
    Normal,
}

pub const EXACT_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    /// U of the first sample: pairs where it is larger, ties counting one half.
    pub u: f64,
    pub p_value: f64,
    pub two_sided: bool,
    pub method: UTestMethod,
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult, MetricsError> {
    mann_whitney_u_with(a, b, UTestMethod::Auto)
}

/// Two-sided Mann-Whitney U test.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], method: UTestMethod) -> Result<UTestResult, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::Empty);
    }
    check_finite(a)?;
    check_finite(b)?;
    let (n, m) = (a.len(), b.len());
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&all);
    let r_a: f64 = ranks[..n].iter().sum();
    let u = r_a - (n * (n + 1)) as f64 / 2.0;
    let ties = tie_term(&all);
    let method = match method {
        UTestMethod::Auto if n * m <= EXACT_LIMIT && ties == 0.0 => UTestMethod::Exact,
        UTestMethod::Auto => UTestMethod::Normal,
        UTestMethod::Exact if ties != 0.0 => {
            return Err(MetricsError::Invalid(
                "exact U distribution requires tie-free samples".into(),
            ))
        }
        other => other,
    };
    let p_value = match method {
        UTestMethod::Exact => exact_p(n, m, u),
        _ => normal_p(n, m, u, ties),
    };
    Ok(UTestResult {
        u,
        p_value,
        two_sided: true,
        method,
    })
}

/// `Σ (t³ - t)` over groups of tied values.
fn tie_term(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut s = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        s += t * t * t - t;
        i = j + 1;
    }
    s
}

/// Null distribution of U by counting rank arrangements:
/// `f(i, j, u) = f(i-1, j, u-j) + f(i, j-1, u)`.
fn exact_p(n: usize, m: usize, u: f64) -> f64 {
    let max_u = n * m;
    // counts[j][u] for the current i
    let mut prev: Vec<Vec<f64>> = (0..=m).map(|_| vec![0.0; max_u + 1]).collect();
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for _i in 1..=n {
        let mut cur: Vec<Vec<f64>> = (0..=m).map(|_| vec![0.0; max_u + 1]).collect();
        cur[0][0] = 1.0;
        for j in 1..=m {
            for k in 0..=max_u {
                let from_i = if k >= j { prev[j][k - j] } else { 0.0 };
                cur[j][k] = from_i + cur[j - 1][k];
            }
        }
        prev = cur;
    }
    let counts = &prev[m];
    let total: f64 = counts.iter().sum();
    let u = u.round() as usize;
    let lower: f64 = counts[..=u].iter().sum::<f64>() / total;
    let upper: f64 = counts[u..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Normal approximation with tie-corrected variance and continuity correction.
fn normal_p(n: usize, m: usize, u: f64, ties: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let big_n = nf + mf;
    let mean = nf * mf / 2.0;
    let var = nf * mf / 12.0 * ((big_n + 1.0) - ties / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub n: usize,
    pub top_k: usize,
    pub overlap_pct: f64,
    pub shared: Vec<String>,
}

/// Percentage of the `top_k` most frequent n-grams the two corpora share.
pub fn overlap_analysis(a: &[TokenSeq], b: &[TokenSeq], n: usize, top_k: usize) -> Result<OverlapReport, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::Empty);
    }
    if n == 0 || top_k == 0 {
        return Err(MetricsError::Invalid("gram size and top_k must be at least 1".into()));
    }
    let ta: std::collections::BTreeSet<String> = top_ngrams(a, n, top_k).ngrams().map(str::to_string).collect();
    let tb: std::collections::BTreeSet<String> = top_ngrams(b, n, top_k).ngrams().map(str::to_string).collect();
    let shared: Vec<String> = ta.intersection(&tb).cloned().collect();
    Ok(OverlapReport {
        n,
        top_k,
        overlap_pct: 100.0 * shared.len() as f64 / top_k as f64,
        shared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellProvenance {
    pub train: String,
    pub test: String,
    pub held_out: bool,
    pub n_train: usize,
    pub n_test: usize,
    pub warnings: Vec<String>,
}

/// AUC of a model trained on row `i` and tested on column `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEvalMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub cells: Vec<Vec<CellProvenance>>,
}

impl CrossEvalMatrix {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("train\\test");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (name, row) in self.names.iter().zip(&self.values) {
            s.push_str(name);
            for v in row {
                let _ = write!(s, ",{v:.6}");
            }
            s.push('\n');
        }
        s
    }

    /// Heat map: darker cells have higher AUC. `generated` adds a timestamp comment.
    pub fn to_svg(&self, generated: Option<&str>) -> String {
        let k = self.names.len();
        let (cell, left, top) = (90.0, 140.0, 120.0);
        let w = left + cell * k as f64 + 20.0;
        let h = top + cell * k as f64 + 40.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="13">"#
        );
        if let Some(g) = generated {
            let _ = writeln!(s, "<!-- generated {g} -->");
        }
        let _ = writeln!(
            s,
            r#"<text x="{left}" y="20">Cross-dataset AUC (row: trained on, column: tested on)</text>"#
        );
        for (j, name) in self.names.iter().enumerate() {
            let x = left + cell * (j as f64 + 0.5);
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" text-anchor="start" transform="rotate(-40 {x} {})">{}</text>"#,
                top - 8.0,
                top - 8.0,
                escape(name)
            );
        }
        for (i, name) in self.names.iter().enumerate() {
            let y = top + cell * i as f64;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                left - 8.0,
                y + cell / 2.0 + 4.0,
                escape(name)
            );
            for j in 0..k {
                let v = self.values[i][j].clamp(0.0, 1.0);
                let shade = (255.0 * (1.0 - v)).round() as u8;
                let fill = format!("rgb({shade},{shade},255)");
                let ink = if v > 0.55 { "white" } else { "black" };
                let x = left + cell * j as f64;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/><text x="{}" y="{}" text-anchor="middle" fill="{ink}">{:.3}</text>"#,
                    x + cell / 2.0,
                    y + cell / 2.0 + 4.0,
                    self.values[i][j]
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Trains on each dataset and tests on every dataset. Diagonal cells train
/// on a stratified split and test on its held-out part.
pub fn cross_eval(datasets: &[Dataset], protocol: &PreparedProtocol) -> Result<CrossEvalMatrix, ProtocolError> {
    if datasets.len() < 2 {
        return Err(ProtocolError::InvalidData(
            "cross evaluation needs at least two datasets".into(),
        ));
    }
    for ds in datasets {
        if ds.classes().len() < 2 {
            return Err(ProtocolError::InvalidData(format!(
                "dataset {} lacks one of the classes",
                ds.name
            )));
        }
    }
    let k = datasets.len();
    let seed = protocol.protocol.seed;
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let results: Vec<Result<(Evaluation, CellProvenance), ProtocolError>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let cell_seed = derive_seed(seed, (i * k + j) as u64);
            let (train, test, held_out) = if i == j {
                let (a, b) = stratified_holdout(
                    &datasets[i],
                    protocol.protocol.holdout_fraction,
                    derive_seed(seed, i as u64),
                )?;
                (a, b, true)
            } else {
                (datasets[i].clone(), datasets[j].clone(), false)
            };
            let e = protocol.evaluate(&train, &test, cell_seed)?;
            let prov = CellProvenance {
                train: datasets[i].name.clone(),
                test: datasets[j].name.clone(),
                held_out,
                n_train: train.len(),
                n_test: test.len(),
                warnings: e.warnings.clone(),
            };
            Ok((e, prov))
        })
        .collect();
    let mut values = vec![vec![0.0; k]; k];
    let mut prov: Vec<Vec<Option<CellProvenance>>> = vec![vec![None; k]; k];
    for (&(i, j), r) in cells.iter().zip(results) {
        let (e, p) = r?;
        values[i][j] = e.auc;
        prov[i][j] = Some(p);
    }
    Ok(CrossEvalMatrix {
        names: datasets.iter().map(|d| d.name.clone()).collect(),
        values,
        cells: prov
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.expect("every cell evaluated")).collect())
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub mean_balanced_accuracy: f64,
    /// Mean over folds whose test part holds both classes.
    pub mean_auc: Option<f64>,
}

/// Evaluates the protocol on each fold of `ds`, training on the rest.
pub fn cross_validate(
    ds: &Dataset,
    folds: &FoldAssignment,
    protocol: &PreparedProtocol,
) -> Result<CrossValidation, ProtocolError> {
    if folds.fold.len() != ds.len() {
        return Err(ProtocolError::InvalidData(format!(
            "{} fold entries for {} records",
            folds.fold.len(),
            ds.len()
        )));
    }
    if ds.classes().len() < 2 {
        return Err(ProtocolError::InvalidData(format!(
            "dataset {} lacks one of the classes",
            ds.name
        )));
    }
    let seed = protocol.protocol.seed;
    let results: Vec<Result<FoldResult, ProtocolError>> = (0..folds.k)
        .into_par_iter()
        .map(|f| {
            let (tr, te) = folds.split(f);
            let train = ds.with_records(tr.iter().map(|&i| ds.records[i].clone()).collect());
            let test = ds.with_records(te.iter().map(|&i| ds.records[i].clone()).collect());
            let y_test = test.design_flags()?;
            let (train_p, test_p, _) = protocol.prepare_pair(&train, &test)?;
            let fitted = protocol.fit_prepared(&train_p, derive_seed(seed, f as u64))?;
            let scores = protocol.score_prepared(&fitted, &test_p)?;
            let t = fitted.model.decision_threshold();
            let pred: Vec<bool> = scores.iter().map(|&s| s >= t).collect();
            let mut metrics = classification_metrics(&confusion(&y_test, &pred)?)?;
            metrics.auc = auc(&scores, &y_test).ok();
            Ok(FoldResult { fold: f, metrics })
        })
        .collect();
    let folds_out: Vec<FoldResult> = results.into_iter().collect::<Result<_, _>>()?;
    let n = folds_out.len() as f64;
    let aucs: Vec<f64> = folds_out.iter().filter_map(|f| f.metrics.auc).collect();
    Ok(CrossValidation {
        mean_accuracy: folds_out.iter().map(|f| f.metrics.accuracy).sum::<f64>() / n,
        mean_balanced_accuracy: folds_out.iter().map(|f| f.metrics.balanced_accuracy).sum::<f64>() / n,
        mean_auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
        folds: folds_out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkResult {
    pub size: usize,
    /// One AUC per (repetition, classifier), repetition-major.
    pub aucs: Vec<f64>,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// AUC distribution per training size. Repetition `r` draws its subsample
/// and fits with seeds derived from `(seed, r)` only, so equal sizes give
/// equal entries. A size equal to the training set uses it whole.
pub fn chunk_sweep(
    train: &Dataset,
    test: &Dataset,
    chunk_sizes: &[usize],
    protocol: &PreparedProtocol,
    suite: &[ClassifierSpec],
    repeats: usize,
    seed: u64,
) -> Result<Vec<ChunkResult>, ProtocolError> {
    if repeats == 0 || suite.is_empty() {
        return Err(ProtocolError::InvalidData(
            "sweep needs at least one repetition and one classifier".into(),
        ));
    }
    if let Some(&big) = chunk_sizes.iter().find(|&&c| c > train.len()) {
        return Err(ProtocolError::InvalidData(format!(
            "chunk {big} exceeds the {} training records",
            train.len()
        )));
    }
    let variants: Vec<PreparedProtocol> = suite.iter().map(|s| protocol.with_classifier(s.clone())).collect();
    chunk_sizes
        .iter()
        .map(|&size| {
            let jobs: Vec<(usize, usize)> = (0..repeats)
                .flat_map(|r| (0..suite.len()).map(move |c| (r, c)))
                .collect();
            let aucs: Vec<f64> = jobs
                .par_iter()
                .map(|&(r, c)| {
                    let rep_seed = derive_seed(seed, r as u64);
                    let sub = stratified_subsample(train, size, rep_seed)?;
                    Ok(variants[c].evaluate(&sub, test, rep_seed)?.auc)
                })
                .collect::<Result<_, ProtocolError>>()?;
            Ok(ChunkResult {
                size,
                median: median(&aucs),
                min: aucs.iter().copied().fold(f64::INFINITY, f64::min),
                max: aucs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                aucs,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_auc(s: &[f64], y: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if y[i] && !y[j] {
                    den += 1.0;
                    num += if s[i] > s[j] {
                        1.0
                    } else if s[i] == s[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn confusion_examples() {
        let t = [true, false, true, false];
        let p = [true, true, false, false];
        assert_eq!(
            confusion(&t, &p).unwrap(),
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 1
            }
        );
        let cm = confusion(&[true, true, true, false, false, false, false], &[false; 7]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 0,
                fp: 0,
                tn: 4,
                fn_: 3
            }
        );
    }

    #[test]
    fn metric_examples() {
        let perfect = classification_metrics(&ConfusionMatrix {
            tp: 5,
            fp: 0,
            tn: 5,
            fn_: 0,
        })
        .unwrap();
        for v in [
            perfect.accuracy,
            perfect.balanced_accuracy,
            perfect.precision,
            perfect.recall,
            perfect.f1,
            perfect.mcc,
        ] {
            assert_eq!(v, 1.0);
        }
        let m = classification_metrics(&ConfusionMatrix {
            tp: 3,
            fp: 1,
            tn: 4,
            fn_: 2,
        })
        .unwrap();
        assert!((m.mcc - 10.0 / 600f64.sqrt()).abs() < 1e-12);
        let none = classification_metrics(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            tn: 4,
            fn_: 3,
        })
        .unwrap();
        assert_eq!(none.precision, 0.0);
        assert_eq!(none.mcc, 0.0);
        assert!(classification_metrics(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 4], &[true, false, true, false]).unwrap(), 0.5);
        let s = [0.8, 0.7, 0.6, 0.2];
        let y = [true, false, true, false];
        assert_eq!(auc(&s, &y).unwrap(), 0.75);
        assert_eq!(brute_auc(&s, &y), 0.75);
        assert_eq!(auc(&[1.0, 2.0], &[true, true]), Err(MetricsError::SingleClass));
    }

    #[test]
    fn u_test_examples() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.method, UTestMethod::Exact);
        assert!((r.p_value - 1.0 / 3.0).abs() < 1e-12);
        let a = [1.0, 5.0, 3.0, 3.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 8.0);
        assert_eq!(r.method, UTestMethod::Normal);
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
    }

    #[test]
    fn exact_distribution_sums_to_one_and_is_symmetric() {
        // p at the centre of the distribution is 1
        assert_eq!(exact_p(3, 4, 6.0), 1.0);
        assert!((exact_p(3, 4, 0.0) - exact_p(3, 4, 12.0)).abs() < 1e-15);
        // one arrangement of C(7,3) = 35 has U = 0
        assert!((exact_p(3, 4, 0.0) - 2.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_examples() {
        let a = vec![TokenSeq::from_text("alpha beta gamma")];
        let b = vec![TokenSeq::from_text("delta epsilon zeta")];
        assert_eq!(overlap_analysis(&a, &a, 1, 3).unwrap().overlap_pct, 100.0);
        assert_eq!(overlap_analysis(&a, &b, 1, 3).unwrap().overlap_pct, 0.0);
    }

    #[test]
    fn csv_shape() {
        let m = CrossEvalMatrix {
            names: vec!["a".into(), "b".into()],
            values: vec![vec![0.9, 0.5], vec![0.6, 0.8]],
            cells: vec![],
        };
        assert_eq!(
            m.to_csv(),
            "train\\test,a,b\na,0.900000,0.500000\nb,0.600000,0.800000\n"
        );
        assert!(m.to_svg(None).contains("0.900"));
        assert!(!m.to_svg(None).contains("generated"));
    }
}
