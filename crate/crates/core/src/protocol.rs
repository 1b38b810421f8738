//! Experiment protocols: pipeline, vectorizer, balancing, augmentation and
//! classifier wired into a single fit/score unit.
//!
//! [`ExperimentProtocol`] is the serialisable config with file references;
//! [`PreparedProtocol`] holds the loaded artifacts and does the work.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{cross_domain_transfer, total_domain_augment, AugmentConfig, AugmentError, Injector};
use crate::corpus::{CorpusError, Dataset, Label};
use crate::embedding::{load_embedding, EmbeddingError, EmbeddingModel};
use crate::features::{
    count_transform, embedding_transform, fit_vocabulary, tfidf_transform, DocMatrix, FeatureError, Standardizer,
    Vocabulary,
};
use crate::learn::{
    random_oversample, smote, train_classifier, ClassifierKind, ClassifierSpec, LearnError, TrainedModel,
};
use crate::metrics::{auc, classification_metrics, confusion, MetricsError, MetricsReport};
use crate::rng::derive_seed;
use crate::seeded_rng;
use crate::textproc::{default_stopwords, load_word_list, LemmaLexicon, Pipeline, PipelineConfig, TokenSeq};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

impl ProtocolError {
    /// True for errors caused by the input data rather than the setup.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            ProtocolError::InvalidData(_)
                | ProtocolError::Corpus(_)
                | ProtocolError::Metrics(_)
                | ProtocolError::Learn(
                    LearnError::SingleClass | LearnError::NonFinite { .. } | LearnError::NegativeFeature { .. }
                )
                | ProtocolError::Feature(FeatureError::EmptyCorpus | FeatureError::NoNgrams(..))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    /// `"default"`, `"none"` or a word-list path.
    pub stopwords: String,
    pub min_len: usize,
    pub max_len: usize,
    pub lemmatize: bool,
    /// Tab-separated surface/lemma file; the bundled table when absent.
    pub lemma_file: Option<PathBuf>,
    pub spell_correct: bool,
    pub strip_code: bool,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        let d = PipelineConfig::default();
        Self {
            stopwords: "default".into(),
            min_len: d.min_len,
            max_len: d.max_len,
            lemmatize: d.lemmatize,
            lemma_file: None,
            spell_correct: d.spell_correct,
            strip_code: d.strip_code,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorizerKind {
    Count,
    Tfidf,
    EmbeddingMean,
    /// Presence of the 200 most frequent bigrams.
    BigramTop200,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VectorizerSettings {
    pub kind: VectorizerKind,
    pub ngram_range: (usize, usize),
    pub max_features: Option<usize>,
    /// Required for `embedding-mean`.
    pub embedding: Option<PathBuf>,
    /// Per-feature standardisation of document embeddings with training statistics.
    pub standardize: bool,
}

impl Default for VectorizerSettings {
    fn default() -> Self {
        Self {
            kind: VectorizerKind::Tfidf,
            ngram_range: (1, 1),
            max_features: None,
            embedding: None,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Balancing {
    None,
    Oversample,
    Smote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentationMode {
    None,
    TotalDomain,
    CrossDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentationSettings {
    pub mode: AugmentationMode,
    /// Injector embedding per dataset domain.
    pub injectors: BTreeMap<String, PathBuf>,
    #[serde(flatten)]
    pub config: AugmentConfig,
}

impl Default for AugmentationSettings {
    fn default() -> Self {
        Self {
            mode: AugmentationMode::None,
            injectors: BTreeMap::new(),
            config: AugmentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentProtocol {
    pub pipeline: PipelineSettings,
    pub vectorizer: VectorizerSettings,
    pub classifier: ClassifierSpec,
    pub balancing: Balancing,
    pub smote_k: usize,
    pub augmentation: AugmentationSettings,
    /// Fraction of a dataset held out when it is both trained and tested on.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for ExperimentProtocol {
    fn default() -> Self {
        Self {
            pipeline: PipelineSettings::default(),
            vectorizer: VectorizerSettings::default(),
            classifier: ClassifierSpec::new(ClassifierKind::Logreg),
            balancing: Balancing::Oversample,
            smote_k: 5,
            augmentation: AugmentationSettings::default(),
            holdout_fraction: 0.2,
            seed: 42,
        }
    }
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn require(path: PathBuf) -> Result<PathBuf, ProtocolError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(ProtocolError::MissingArtifact(path))
    }
}

impl ExperimentProtocol {
    /// Short human-readable summary such as `stopwords+oversample+tfidf+logreg`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.pipeline.stopwords != "none" {
            parts.push("stopwords".to_string());
        }
        if self.pipeline.lemmatize {
            parts.push("lemmas".into());
        }
        match self.augmentation.mode {
            AugmentationMode::None => {}
            AugmentationMode::TotalDomain => parts.push("total-domain".into()),
            AugmentationMode::CrossDomain => parts.push("cross-domain".into()),
        }
        match self.balancing {
            Balancing::None => {}
            Balancing::Oversample => parts.push("oversample".into()),
            Balancing::Smote => parts.push("smote".into()),
        }
        parts.push(
            serde_json::to_value(self.vectorizer.kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        );
        parts.push(self.classifier.kind.to_string());
        parts.join("+")
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidProtocol(m));
        self.classifier.validate()?;
        self.augmentation.config.validate()?;
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return bad(format!("holdout_fraction {} must be in (0, 1)", self.holdout_fraction));
        }
        if self.balancing == Balancing::Smote && self.smote_k == 0 {
            return bad("smote_k must be at least 1".into());
        }
        if self.vectorizer.kind == VectorizerKind::EmbeddingMean && self.vectorizer.embedding.is_none() {
            return bad("embedding-mean vectorizer needs an embedding file".into());
        }
        let (lo, hi) = self.vectorizer.ngram_range;
        if lo == 0 || lo > hi {
            return bad(format!("invalid ngram_range ({lo}, {hi})"));
        }
        match self.augmentation.mode {
            AugmentationMode::TotalDomain if self.augmentation.injectors.is_empty() => {
                bad("total-domain augmentation needs an injector".into())
            }
            AugmentationMode::CrossDomain if self.augmentation.injectors.len() < 2 => {
                bad("cross-domain augmentation needs injectors for two domains".into())
            }
            _ => Ok(()),
        }
    }

    /// Every file the protocol refers to, relative paths resolved against `base`.
    pub fn artifacts(&self, base: Option<&Path>) -> Vec<PathBuf> {
        let mut out = Vec::new();
        if !matches!(self.pipeline.stopwords.as_str(), "default" | "none") {
            out.push(resolve(base, Path::new(&self.pipeline.stopwords)));
        }
        if let Some(p) = &self.pipeline.lemma_file {
            out.push(resolve(base, p));
        }
        if self.vectorizer.kind == VectorizerKind::EmbeddingMean {
            if let Some(p) = &self.vectorizer.embedding {
                out.push(resolve(base, p));
            }
        }
        if self.augmentation.mode != AugmentationMode::None {
            out.extend(self.augmentation.injectors.values().map(|p| resolve(base, p)));
        }
        out
    }

    /// Validates, checks that every referenced file exists, then loads them.
    pub fn prepare(&self, base: Option<&Path>) -> Result<PreparedProtocol, ProtocolError> {
        self.validate()?;
        for p in self.artifacts(base) {
            require(p)?;
        }
        let stopword_set = match self.pipeline.stopwords.as_str() {
            "default" => default_stopwords(),
            "none" => Default::default(),
            p => load_word_list(&resolve(base, Path::new(p))).map_err(CorpusError::Io)?,
        };
        let lexicon = match &self.pipeline.lemma_file {
            Some(p) => LemmaLexicon::load(&resolve(base, p)).map_err(ProtocolError::InvalidProtocol)?,
            None => LemmaLexicon::bundled().clone(),
        };
        let config = PipelineConfig {
            stopword_set,
            min_len: self.pipeline.min_len,
            max_len: self.pipeline.max_len,
            lemmatize: self.pipeline.lemmatize,
            spell_correct: self.pipeline.spell_correct,
            strip_code: self.pipeline.strip_code,
        };
        config.validate().map_err(ProtocolError::InvalidProtocol)?;
        let mut pipeline = Pipeline::new(config);
        pipeline.lexicon = lexicon;
        let embedding = match (&self.vectorizer.kind, &self.vectorizer.embedding) {
            (VectorizerKind::EmbeddingMean, Some(p)) => Some(Arc::new(load_embedding(&resolve(base, p))?)),
            _ => None,
        };
        let mut injectors = BTreeMap::new();
        if self.augmentation.mode != AugmentationMode::None {
            for (domain, p) in &self.augmentation.injectors {
                let path = resolve(base, p);
                let model = Arc::new(load_embedding(&path)?);
                injectors.insert(domain.clone(), (model, path.display().to_string()));
            }
        }
        Ok(PreparedProtocol {
            protocol: self.clone(),
            pipeline,
            embedding,
            injectors,
        })
    }
}

/// A protocol with its artifacts in memory.
#[derive(Debug, Clone)]
pub struct PreparedProtocol {
    pub protocol: ExperimentProtocol,
    pub pipeline: Pipeline,
    pub embedding: Option<Arc<EmbeddingModel>>,
    /// Injector embedding and its source name, per domain.
    pub injectors: BTreeMap<String, (Arc<EmbeddingModel>, String)>,
}

#[derive(Debug, Clone)]
pub enum FittedVectorizer {
    Ngrams {
        vocab: Vocabulary,
        kind: VectorizerKind,
    },
    Embedding {
        model: Arc<EmbeddingModel>,
        standardizer: Option<Standardizer>,
    },
}

impl FittedVectorizer {
    pub fn transform(&self, docs: &[TokenSeq]) -> Result<DocMatrix, ProtocolError> {
        Ok(match self {
            FittedVectorizer::Ngrams { vocab, kind } => match kind {
                VectorizerKind::Tfidf => tfidf_transform(docs, vocab),
                VectorizerKind::BigramTop200 => count_transform(docs, vocab, true),
                _ => count_transform(docs, vocab, false),
            },
            FittedVectorizer::Embedding { model, standardizer } => {
                let m = embedding_transform(docs, model);
                match standardizer {
                    Some(s) => s.transform(&m)?,
                    None => m,
                }
            }
        })
    }

    pub fn identity(&self) -> String {
        match self {
            FittedVectorizer::Ngrams { vocab, .. } => format!("vocabulary:{}", vocab.fingerprint()),
            FittedVectorizer::Embedding { model, .. } => format!("embedding:{}", model.fingerprint()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FittedProtocol {
    pub vectorizer: FittedVectorizer,
    pub model: TrainedModel,
    pub train_domain: String,
    pub warnings: Vec<String>,
}

/// Outcome of training on one dataset and scoring another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub auc: f64,
    pub metrics: MetricsReport,
    pub n_train: usize,
    pub n_test: usize,
    pub warnings: Vec<String>,
}

fn flags(ds: &Dataset) -> Result<Vec<bool>, ProtocolError> {
    Ok(ds.design_flags()?)
}

impl PreparedProtocol {
    /// Builds from in-memory artifacts. Injectors are keyed by domain.
    pub fn in_memory(
        protocol: ExperimentProtocol,
        embedding: Option<EmbeddingModel>,
        injectors: BTreeMap<String, EmbeddingModel>,
    ) -> Result<Self, ProtocolError> {
        protocol.classifier.validate()?;
        protocol.augmentation.config.validate()?;
        let config = PipelineConfig {
            stopword_set: match protocol.pipeline.stopwords.as_str() {
                "none" => Default::default(),
                _ => default_stopwords(),
            },
            min_len: protocol.pipeline.min_len,
            max_len: protocol.pipeline.max_len,
            lemmatize: protocol.pipeline.lemmatize,
            spell_correct: protocol.pipeline.spell_correct,
            strip_code: protocol.pipeline.strip_code,
        };
        config.validate().map_err(ProtocolError::InvalidProtocol)?;
        if protocol.vectorizer.kind == VectorizerKind::EmbeddingMean && embedding.is_none() {
            return Err(ProtocolError::InvalidProtocol(
                "embedding-mean vectorizer needs an embedding".into(),
            ));
        }
        Ok(Self {
            pipeline: Pipeline::new(config),
            embedding: embedding.map(Arc::new),
            injectors: injectors
                .into_iter()
                .map(|(d, m)| (d.clone(), (Arc::new(m), format!("in-memory:{d}"))))
                .collect(),
            protocol,
        })
    }

    pub fn with_classifier(&self, spec: ClassifierSpec) -> Self {
        let mut p = self.clone();
        p.protocol.classifier = spec;
        p
    }

    /// Runs the text pipeline and stores the tokens back as the record text.
    pub fn pipelined(&self, ds: &Dataset) -> Dataset {
        let records = ds
            .records
            .par_iter()
            .map(|r| {
                let mut r = r.clone();
                r.text = self.pipeline.run(&r.text).join();
                r
            })
            .collect();
        ds.with_records(records)
    }

    fn injector(&self, domain: &str) -> Result<Injector<'_>, ProtocolError> {
        self.injectors
            .get(domain)
            .map(|(m, name)| Injector::named(m, name))
            .ok_or_else(|| ProtocolError::InvalidProtocol(format!("no injector for domain {domain:?}")))
    }

    fn tokens(ds: &Dataset) -> Vec<TokenSeq> {
        ds.records.iter().map(|r| TokenSeq::from_text(&r.text)).collect()
    }

    /// Pipelines and augments both sides as the protocol's augmentation mode asks.
    pub fn prepare_pair(
        &self,
        train: &Dataset,
        test: &Dataset,
    ) -> Result<(Dataset, Dataset, Vec<String>), ProtocolError> {
        let (train, test) = (self.pipelined(train), self.pipelined(test));
        let cfg = &self.protocol.augmentation.config;
        let mut warnings = Vec::new();
        Ok(match self.protocol.augmentation.mode {
            AugmentationMode::None => (train, test, warnings),
            AugmentationMode::TotalDomain => {
                let aug = total_domain_augment(&train, self.injector(&train.domain)?, cfg)?;
                (aug, test, warnings)
            }
            AugmentationMode::CrossDomain => {
                let pair = cross_domain_transfer(
                    &train,
                    &test,
                    self.injector(&train.domain)?,
                    self.injector(&test.domain)?,
                    cfg,
                )?;
                warnings.extend(pair.warning);
                (pair.train, pair.test, warnings)
            }
        })
    }

    /// Fits vectorizer, balancing and classifier on already prepared records.
    pub fn fit_prepared(&self, train: &Dataset, seed: u64) -> Result<FittedProtocol, ProtocolError> {
        let y = flags(train)?;
        let docs = Self::tokens(train);
        let v = &self.protocol.vectorizer;
        let vectorizer = match v.kind {
            VectorizerKind::EmbeddingMean => {
                let model = self
                    .embedding
                    .clone()
                    .ok_or_else(|| ProtocolError::InvalidProtocol("embedding not loaded".into()))?;
                let standardizer = v
                    .standardize
                    .then(|| Standardizer::fit(&embedding_transform(&docs, &model)));
                FittedVectorizer::Embedding { model, standardizer }
            }
            VectorizerKind::BigramTop200 => FittedVectorizer::Ngrams {
                vocab: fit_vocabulary(&docs, (2, 2), Some(200))?,
                kind: v.kind,
            },
            kind => FittedVectorizer::Ngrams {
                vocab: fit_vocabulary(&docs, v.ngram_range, v.max_features)?,
                kind,
            },
        };
        let x = vectorizer.transform(&docs)?;
        let mut warnings = Vec::new();
        let (x, y) = match self.protocol.balancing {
            Balancing::None => (x, y),
            Balancing::Oversample => {
                let r = random_oversample(&x, &y, derive_seed(seed, 11))?;
                (r.x, r.y)
            }
            Balancing::Smote => {
                let r = smote(&x, &y, self.protocol.smote_k, derive_seed(seed, 12))?;
                warnings.extend(r.warning);
                (r.x, r.y)
            }
        };
        let spec = self.protocol.classifier.clone().with_seed(derive_seed(seed, 13));
        let model = train_classifier(&x, &y, &spec)?.bind(vectorizer.identity());
        Ok(FittedProtocol {
            vectorizer,
            model,
            train_domain: train.domain.clone(),
            warnings,
        })
    }

    pub fn score_prepared(&self, fitted: &FittedProtocol, test: &Dataset) -> Result<Vec<f64>, ProtocolError> {
        let x = fitted.vectorizer.transform(&Self::tokens(test))?;
        Ok(fitted.model.predict_scores(&x)?)
    }

    /// Fits on `train` and reports AUC and threshold metrics on `test`.
    pub fn evaluate(&self, train: &Dataset, test: &Dataset, seed: u64) -> Result<Evaluation, ProtocolError> {
        let y_test = flags(test)?;
        let (train_p, test_p, mut warnings) = self.prepare_pair(train, test)?;
        let fitted = self.fit_prepared(&train_p, seed)?;
        warnings.extend(fitted.warnings.iter().cloned());
        let scores = self.score_prepared(&fitted, &test_p)?;
        let threshold = fitted.model.decision_threshold();
        let predicted: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
        let mut metrics = classification_metrics(&confusion(&y_test, &predicted)?)?;
        let a = auc(&scores, &y_test)?;
        metrics.auc = Some(a);
        Ok(Evaluation {
            auc: a,
            metrics,
            n_train: train.len(),
            n_test: test.len(),
            warnings,
        })
    }
}

fn class_indices(ds: &Dataset) -> Result<[Vec<usize>; 2], ProtocolError> {
    let y = flags(ds)?;
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(ProtocolError::InvalidData(format!(
            "dataset {} has a single class",
            ds.name
        )));
    }
    Ok([pos, neg])
}

/// Stratified random subset of `size` records; each class keeps its share
/// (rounded) and at least one record. Record order follows the input.
pub fn stratified_subsample(ds: &Dataset, size: usize, seed: u64) -> Result<Dataset, ProtocolError> {
    if size > ds.len() {
        return Err(ProtocolError::InvalidData(format!(
            "subsample of {size} from {} records",
            ds.len()
        )));
    }
    if size == ds.len() {
        return Ok(ds.clone());
    }
    if size < 2 {
        return Err(ProtocolError::InvalidData("subsample needs at least 2 records".into()));
    }
    let [mut pos, mut neg] = class_indices(ds)?;
    let n_pos = ((size as f64 * pos.len() as f64 / ds.len() as f64).round() as usize)
        .clamp(1, size - 1)
        .min(pos.len())
        .max(size.saturating_sub(neg.len()));
    let mut rng = seeded_rng(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut keep: Vec<usize> = pos[..n_pos].iter().chain(&neg[..size - n_pos]).copied().collect();
    keep.sort_unstable();
    Ok(ds.with_records(keep.into_iter().map(|i| ds.records[i].clone()).collect()))
}

/// Stratified (train, held-out) split.
pub fn stratified_holdout(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset), ProtocolError> {
    let [mut pos, mut neg] = class_indices(ds)?;
    if pos.len() < 2 || neg.len() < 2 {
        return Err(ProtocolError::InvalidData(format!(
            "dataset {} needs at least two records per class for a held-out split",
            ds.name
        )));
    }
    let mut rng = seeded_rng(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let take = |n: usize| ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let (hp, hn) = (take(pos.len()), take(neg.len()));
    let mut test: Vec<usize> = pos[..hp].iter().chain(&neg[..hn]).copied().collect();
    let mut train: Vec<usize> = pos[hp..].iter().chain(&neg[hn..]).copied().collect();
    test.sort_unstable();
    train.sort_unstable();
    let pick = |ix: Vec<usize>, suffix: &str| {
        let mut d = ds.with_records(ix.into_iter().map(|i| ds.records[i].clone()).collect());
        d.name = format!("{}-{suffix}", ds.name);
        d
    };
    Ok((pick(train, "train"), pick(test, "heldout")))
}

/// Labels as a class list, for reports.
pub fn class_counts(ds: &Dataset) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for r in &ds.records {
        let k = r.label.map(Label::as_str).unwrap_or("unlabeled");
        *m.entry(k.to_string()).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Discussion;

    fn toy(n: usize) -> Dataset {
        let recs = (0..n)
            .map(|i| {
                let (text, label) = if i % 2 == 0 {
                    ("architecture module coupling interface layering", Label::Design)
                } else {
                    ("typo whitespace indentation release version", Label::General)
                };
                Discussion::new(format!("r{i}"), text, "toy").with_label(label)
            })
            .collect();
        Dataset::new("toy", "toy", recs)
    }

    #[test]
    fn defaults_round_trip_through_json() {
        let p = ExperimentProtocol::default();
        let back: ExperimentProtocol = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let partial: ExperimentProtocol = serde_json::from_str(r#"{"classifier":{"kind":"knn"}}"#).unwrap();
        assert_eq!(partial.classifier.k, 5);
        assert_eq!(partial.seed, 42);
    }

    #[test]
    fn missing_embedding_file_reported_before_training() {
        let mut p = ExperimentProtocol::default();
        p.vectorizer.kind = VectorizerKind::EmbeddingMean;
        p.vectorizer.embedding = Some(PathBuf::from("/nonexistent/vectors.vec"));
        assert!(matches!(p.prepare(None), Err(ProtocolError::MissingArtifact(_))));
    }

    #[test]
    fn cross_domain_needs_two_injectors() {
        let mut p = ExperimentProtocol::default();
        p.augmentation.mode = AugmentationMode::CrossDomain;
        p.augmentation.injectors.insert("a".into(), "a.vec".into());
        assert!(matches!(p.validate(), Err(ProtocolError::InvalidProtocol(_))));
    }

    #[test]
    fn separable_toy_scores_perfectly() {
        let prep = PreparedProtocol::in_memory(ExperimentProtocol::default(), None, BTreeMap::new()).unwrap();
        let e = prep.evaluate(&toy(20), &toy(10), 1).unwrap();
        assert_eq!(e.auc, 1.0);
        assert_eq!(e.metrics.accuracy, 1.0);
    }

    #[test]
    fn subsample_keeps_both_classes() {
        let ds = toy(40);
        let s = stratified_subsample(&ds, 10, 3).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(class_counts(&s)["design"], 5);
        assert_eq!(stratified_subsample(&ds, 40, 3).unwrap(), ds);
    }

    #[test]
    fn holdout_is_disjoint() {
        let (a, b) = stratified_holdout(&toy(30), 0.2, 0).unwrap();
        assert_eq!(a.len() + b.len(), 30);
        assert!(a.records.iter().all(|r| b.records.iter().all(|s| s.id != r.id)));
    }
}
