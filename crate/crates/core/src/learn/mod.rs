//! From-scratch binary classifiers, class-imbalance resampling and fold
//! construction. Labels are `bool` with `true` meaning design.

mod bayes;
mod folds;
mod knn;
mod linear;
mod resample;
mod spec;
mod tree;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{DocMatrix, Scheme};

pub use bayes::{GaussianNbParams, MultinomialNbParams};
pub use folds::{kfold, stratified_kfold, FoldAssignment};
pub use knn::KnnParams;
pub use linear::{loss, loss_gradient, param_len, Batch, MlpParams};
pub use resample::{random_oversample, smote, Resampled, SampleOrigin};
pub use spec::{ClassifierKind, ClassifierSpec};
pub use tree::{Tree, TreeNode};

pub const MODEL_FORMAT: &str = "design-miner-model v1";

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("{rows} feature rows but {labels} labels")]
    ShapeMismatch { rows: usize, labels: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("negative feature at row {row}, column {col} (multinomial naive Bayes needs counts)")]
    NegativeFeature { row: usize, col: usize },
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),
    #[error("invalid fold request: {0}")]
    InvalidFolds(String),
    #[error("model file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Which representation a model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBinding {
    pub scheme: Scheme,
    pub n_features: usize,
    /// Hash of the vocabulary or embedding the features came from.
    pub identity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingProvenance {
    pub n_samples: usize,
    pub n_design: usize,
    pub spec: ClassifierSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Linear { weights: Vec<f64>, bias: f64 },
    GaussianNb(GaussianNbParams),
    MultinomialNb(MultinomialNbParams),
    Knn(KnnParams),
    Tree(Tree),
    Forest { trees: Vec<Tree> },
    Mlp(MlpParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub params: ModelParams,
    pub binding: FeatureBinding,
    pub provenance: TrainingProvenance,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    model: TrainedModel,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_training_data(x: &DocMatrix, y: &[bool]) -> Result<(), LearnError> {
    if x.n_rows() != y.len() {
        return Err(LearnError::ShapeMismatch {
            rows: x.n_rows(),
            labels: y.len(),
        });
    }
    if let Some((row, col)) = x.find_non_finite() {
        return Err(LearnError::NonFinite { row, col });
    }
    let pos = y.iter().filter(|&&b| b).count();
    if pos == 0 || pos == y.len() {
        return Err(LearnError::SingleClass);
    }
    Ok(())
}

/// Fits a classifier. Deterministic for a fixed `spec.seed`.
pub fn train_classifier(x: &DocMatrix, y: &[bool], spec: &ClassifierSpec) -> Result<TrainedModel, LearnError> {
    spec.validate()?;
    check_training_data(x, y)?;
    let params = match spec.kind {
        ClassifierKind::Logreg | ClassifierKind::LinearSvm => {
            let p = linear::fit_sgd(x, y, spec, vec![0.0; param_len(spec, x.n_features())])?;
            let (weights, bias) = p.split_at(x.n_features());
            ModelParams::Linear {
                weights: weights.to_vec(),
                bias: bias[0],
            }
        }
        ClassifierKind::Mlp => {
            let init = linear::mlp_init(x.n_features(), spec.hidden_units, spec.seed);
            let p = linear::fit_sgd(x, y, spec, init)?;
            ModelParams::Mlp(MlpParams::from_flat(&p, x.n_features(), spec.hidden_units))
        }
        ClassifierKind::GaussianNb => ModelParams::GaussianNb(bayes::fit_gaussian(x, y, spec.var_floor)),
        ClassifierKind::MultinomialNb => ModelParams::MultinomialNb(bayes::fit_multinomial(x, y, spec.nb_alpha)?),
        ClassifierKind::Knn => ModelParams::Knn(KnnParams {
            exemplars: x.clone(),
            labels: y.to_vec(),
            k: spec.k,
        }),
        ClassifierKind::DecisionTree => {
            let weights = vec![1.0; y.len()];
            ModelParams::Tree(tree::fit_tree(x, y, &weights, spec, None, spec.seed))
        }
        ClassifierKind::RandomForest => ModelParams::Forest {
            trees: tree::fit_forest(x, y, spec),
        },
    };
    Ok(TrainedModel {
        kind: spec.kind,
        params,
        binding: FeatureBinding {
            scheme: x.scheme,
            n_features: x.n_features(),
            identity: "unbound".into(),
        },
        provenance: TrainingProvenance {
            n_samples: y.len(),
            n_design: y.iter().filter(|&&b| b).count(),
            spec: spec.clone(),
        },
    })
}

impl TrainedModel {
    pub fn bind(mut self, identity: impl Into<String>) -> Self {
        self.binding.identity = identity.into();
        self
    }

    /// Score at which hard labels switch to design (`score >= threshold`).
    pub fn decision_threshold(&self) -> f64 {
        match self.kind {
            ClassifierKind::LinearSvm | ClassifierKind::GaussianNb | ClassifierKind::MultinomialNb => 0.0,
            _ => 0.5,
        }
    }

    /// One score per row, increasing with the likelihood of design.
    ///
    /// Logistic regression and the MLP return probabilities, the SVM raw
    /// margins, naive Bayes log-odds, kNN and trees the design fraction of
    /// the neighbours or leaf.
    pub fn predict_scores(&self, x: &DocMatrix) -> Result<Vec<f64>, LearnError> {
        if x.n_features() != self.binding.n_features {
            return Err(LearnError::DimensionMismatch {
                expected: self.binding.n_features,
                got: x.n_features(),
            });
        }
        Ok(match &self.params {
            ModelParams::Linear { weights, bias } => x
                .rows()
                .map(|r| {
                    let z = r.dot(weights) + bias;
                    if self.kind == ClassifierKind::Logreg {
                        sigmoid(z)
                    } else {
                        z
                    }
                })
                .collect(),
            ModelParams::Mlp(p) => x.rows().map(|r| p.forward(&r).1).collect(),
            ModelParams::GaussianNb(p) => x.rows().map(|r| p.log_odds(&r)).collect(),
            ModelParams::MultinomialNb(p) => x.rows().map(|r| p.log_odds(&r)).collect(),
            ModelParams::Knn(p) => p.scores(x),
            ModelParams::Tree(t) => x.rows().map(|r| t.score(&r)).collect(),
            ModelParams::Forest { trees } => x
                .rows()
                .map(|r| trees.iter().map(|t| t.score(&r)).sum::<f64>() / trees.len() as f64)
                .collect(),
        })
    }

    pub fn predict_labels(&self, x: &DocMatrix) -> Result<Vec<bool>, LearnError> {
        let t = self.decision_threshold();
        Ok(self.predict_scores(x)?.into_iter().map(|s| s >= t).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.into(),
            model: self.clone(),
        })
        .expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| LearnError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(LearnError::Format(format!(
                "unsupported model format {:?}",
                file.format
            )));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

pub fn predict_scores(model: &TrainedModel, x: &DocMatrix) -> Result<Vec<f64>, LearnError> {
    model.predict_scores(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> DocMatrix {
        DocMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), Scheme::Count)
    }

    #[test]
    fn separable_logreg_fits() {
        let x = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let y = [true, false];
        let m = train_classifier(&x, &y, &ClassifierSpec::new(ClassifierKind::Logreg)).unwrap();
        assert_eq!(m.predict_labels(&x).unwrap(), vec![true, false]);
        assert!(m.predict_scores(&x).unwrap().iter().all(|s| *s > 0.0 && *s < 1.0));
    }

    #[test]
    fn zero_weight_logreg_scores_half() {
        let m = TrainedModel {
            kind: ClassifierKind::Logreg,
            params: ModelParams::Linear {
                weights: vec![0.0; 3],
                bias: 0.0,
            },
            binding: FeatureBinding {
                scheme: Scheme::Count,
                n_features: 3,
                identity: "t".into(),
            },
            provenance: TrainingProvenance {
                n_samples: 0,
                n_design: 0,
                spec: ClassifierSpec::new(ClassifierKind::Logreg),
            },
        };
        let x = dense(&[&[1.0, -2.0, 3.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(m.predict_scores(&x).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn single_class_and_non_finite_rejected() {
        let x = dense(&[&[1.0], &[2.0]]);
        let spec = ClassifierSpec::new(ClassifierKind::Logreg);
        assert!(matches!(
            train_classifier(&x, &[true, true], &spec),
            Err(LearnError::SingleClass)
        ));
        let x = dense(&[&[1.0, f64::NAN], &[2.0, 1.0]]);
        assert!(matches!(
            train_classifier(&x, &[true, false], &spec),
            Err(LearnError::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn every_kind_trains_and_scores() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let t = i as f64 / 40.0;
            rows.push(vec![t, 1.0 - t, (i % 3) as f64]);
            y.push(i >= 20);
        }
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        for kind in ClassifierKind::ALL {
            let mut spec = ClassifierSpec::new(kind);
            spec.n_trees = 10;
            let m = train_classifier(&x, &y, &spec).unwrap();
            let labels = m.predict_labels(&x).unwrap();
            let acc = labels.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
            assert!(acc >= 0.75, "{kind:?} accuracy {acc}");
            let back = TrainedModel::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m, "{kind:?} round trip");
        }
    }

    #[test]
    fn dimension_checked_at_prediction() {
        let x = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let m = train_classifier(&x, &[true, false], &ClassifierSpec::new(ClassifierKind::GaussianNb)).unwrap();
        assert!(matches!(
            m.predict_scores(&dense(&[&[1.0]])),
            Err(LearnError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
