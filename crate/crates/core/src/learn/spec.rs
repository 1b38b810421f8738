use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Logreg,
    LinearSvm,
    GaussianNb,
    MultinomialNb,
    Knn,
    DecisionTree,
    RandomForest,
    Mlp,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 8] = [
        ClassifierKind::Logreg,
        ClassifierKind::LinearSvm,
        ClassifierKind::GaussianNb,
        ClassifierKind::MultinomialNb,
        ClassifierKind::Knn,
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::GaussianNb => "gaussian_nb",
            ClassifierKind::MultinomialNb => "multinomial_nb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::Mlp => "mlp",
        }
    }

    /// Kinds trained by gradient descent.
    pub fn is_gradient_based(self) -> bool {
        matches!(
            self,
            ClassifierKind::Logreg | ClassifierKind::LinearSvm | ClassifierKind::Mlp
        )
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown classifier {s:?}"))
    }
}

/// Fully resolved classifier settings. Fields a kind does not use are kept
/// at their defaults so reports always show the complete set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PartialSpec")]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub learning_rate: f64,
    /// L2 strength
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// neighbours for kNN
    pub k: usize,
    /// `usize::MAX` for unlimited
    pub max_depth: usize,
    pub min_leaf: usize,
    pub n_trees: usize,
    /// Features tried per split; `None` is all for a single tree and √d for a forest.
    pub features_per_split: Option<usize>,
    pub hidden_units: usize,
    pub nb_alpha: f64,
    pub var_floor: f64,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            learning_rate: if kind == ClassifierKind::Mlp { 0.05 } else { 0.1 },
            lambda: 1e-4,
            epochs: 50,
            batch_size: 32,
            k: 5,
            max_depth: 16,
            min_leaf: 2,
            n_trees: 100,
            features_per_split: None,
            hidden_units: 64,
            nb_alpha: 1.0,
            var_floor: 1e-9,
            seed: 42,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: &str| Err(LearnError::InvalidSpec(format!("{}: {m}", self.kind)));
        match self.kind {
            ClassifierKind::Logreg | ClassifierKind::LinearSvm | ClassifierKind::Mlp => {
                if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
                    return bad("learning_rate must be positive");
                }
                if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
                    return bad("lambda must be non-negative");
                }
                if self.epochs == 0 || self.batch_size == 0 {
                    return bad("epochs and batch_size must be positive");
                }
                if self.kind == ClassifierKind::Mlp && self.hidden_units == 0 {
                    return bad("hidden_units must be positive");
                }
            }
            ClassifierKind::Knn if self.k == 0 => return bad("k must be positive"),
            ClassifierKind::DecisionTree | ClassifierKind::RandomForest => {
                if self.max_depth == 0 || self.min_leaf == 0 {
                    return bad("max_depth and min_leaf must be positive");
                }
                if self.kind == ClassifierKind::RandomForest && self.n_trees == 0 {
                    return bad("n_trees must be positive");
                }
                if self.features_per_split == Some(0) {
                    return bad("features_per_split must be positive");
                }
            }
            ClassifierKind::GaussianNb if self.var_floor.is_nan() || self.var_floor <= 0.0 => {
                return bad("var_floor must be positive")
            }
            ClassifierKind::MultinomialNb if self.nb_alpha.is_nan() || self.nb_alpha <= 0.0 => {
                return bad("nb_alpha must be positive")
            }
            _ => {}
        }
        Ok(())
    }
}

/// Config-file form: only `kind` is required, the rest default per kind.
#[derive(Deserialize)]
struct PartialSpec {
    kind: ClassifierKind,
    learning_rate: Option<f64>,
    lambda: Option<f64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    k: Option<usize>,
    max_depth: Option<usize>,
    min_leaf: Option<usize>,
    n_trees: Option<usize>,
    features_per_split: Option<usize>,
    hidden_units: Option<usize>,
    nb_alpha: Option<f64>,
    var_floor: Option<f64>,
    seed: Option<u64>,
}

impl From<PartialSpec> for ClassifierSpec {
    fn from(p: PartialSpec) -> Self {
        let d = ClassifierSpec::new(p.kind);
        ClassifierSpec {
            kind: p.kind,
            learning_rate: p.learning_rate.unwrap_or(d.learning_rate),
            lambda: p.lambda.unwrap_or(d.lambda),
            epochs: p.epochs.unwrap_or(d.epochs),
            batch_size: p.batch_size.unwrap_or(d.batch_size),
            k: p.k.unwrap_or(d.k),
            max_depth: p.max_depth.unwrap_or(d.max_depth),
            min_leaf: p.min_leaf.unwrap_or(d.min_leaf),
            n_trees: p.n_trees.unwrap_or(d.n_trees),
            features_per_split: p.features_per_split.or(d.features_per_split),
            hidden_units: p.hidden_units.unwrap_or(d.hidden_units),
            nb_alpha: p.nb_alpha.unwrap_or(d.nb_alpha),
            var_floor: p.var_floor.unwrap_or(d.var_floor),
            seed: p.seed.unwrap_or(d.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_kind_defaults() {
        let s: ClassifierSpec = serde_json::from_str(r#"{"kind":"mlp","epochs":7}"#).unwrap();
        assert_eq!(s.learning_rate, 0.05);
        assert_eq!(s.epochs, 7);
        let full = serde_json::to_string(&s).unwrap();
        let back: ClassifierSpec = serde_json::from_str(&full).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().parse::<ClassifierKind>().unwrap(), k);
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let mut s = ClassifierSpec::new(ClassifierKind::Knn);
        s.k = 0;
        assert!(s.validate().is_err());
        let mut s = ClassifierSpec::new(ClassifierKind::Logreg);
        s.learning_rate = -1.0;
        assert!(s.validate().is_err());
    }
}
