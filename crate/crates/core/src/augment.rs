//! Similar-word injection. Each token is followed by the injector's nearest
//! words whose cosine similarity reaches the cutoff. Records are expected to
//! hold pipelined text (whitespace-separated tokens).

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Dataset;
use crate::embedding::{most_similar, EmbeddingModel};
use crate::textproc::TokenSeq;

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("cutoff {0} is outside [-1, 1]")]
    InvalidCutoff(f64),
    #[error("max_injected_per_token must be at least 1 when set")]
    ZeroCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub cutoff: f64,
    /// `None` is unlimited.
    pub max_injected_per_token: Option<usize>,
    pub dedupe_within_doc: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            cutoff: 0.6,
            max_injected_per_token: None,
            dedupe_within_doc: true,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(-1.0..=1.0).contains(&self.cutoff) {
            return Err(AugmentError::InvalidCutoff(self.cutoff));
        }
        if self.max_injected_per_token == Some(0) {
            return Err(AugmentError::ZeroCap);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentMode {
    TotalDomain,
    CrossDomain,
}

/// Written into every augmented record's `provenance` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentProvenance {
    pub mode: AugmentMode,
    /// Fingerprint of the embedding that supplied the injected words.
    pub injector: String,
    /// Name of the injector file, when it came from one.
    pub injector_source: Option<String>,
    pub config: AugmentConfig,
    /// The caller is responsible for training injectors on text disjoint from
    /// the records they augment; this records that the guard was not verified here.
    pub separation: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub train: Dataset,
    pub test: Dataset,
    pub train_provenance: AugmentProvenance,
    pub test_provenance: AugmentProvenance,
    pub warning: Option<String>,
}

/// An embedding used as a source of similar words, with an optional name for provenance.
#[derive(Debug, Clone, Copy)]
pub struct Injector<'a> {
    pub model: &'a EmbeddingModel,
    pub source: Option<&'a str>,
}

impl<'a> Injector<'a> {
    pub fn new(model: &'a EmbeddingModel) -> Self {
        Self { model, source: None }
    }

    pub fn named(model: &'a EmbeddingModel, source: &'a str) -> Self {
        Self {
            model,
            source: Some(source),
        }
    }
}

type NeighbourTable = HashMap<String, Vec<String>>;

fn neighbours(
    tokens: &mut dyn Iterator<Item = &str>,
    model: &EmbeddingModel,
    config: &AugmentConfig,
) -> NeighbourTable {
    let distinct: HashSet<&str> = tokens.collect();
    let cap = config.max_injected_per_token.unwrap_or(usize::MAX);
    distinct
        .into_par_iter()
        .map(|t| {
            (
                t.to_string(),
                most_similar(model, t, cap, config.cutoff)
                    .into_iter()
                    .map(|s| s.word)
                    .collect(),
            )
        })
        .collect()
}

fn inject_with(tokens: &TokenSeq, table: &NeighbourTable, config: &AugmentConfig) -> TokenSeq {
    let mut out = Vec::with_capacity(tokens.len());
    let mut emitted: HashSet<String> = HashSet::new();
    for t in tokens.iter() {
        out.push(t.to_string());
        if config.dedupe_within_doc {
            emitted.insert(t.to_string());
        }
        for w in table.get(t).map(Vec::as_slice).unwrap_or_default() {
            if config.dedupe_within_doc && !emitted.insert(w.clone()) {
                continue;
            }
            out.push(w.clone());
        }
    }
    TokenSeq::new(out)
}

/// Emits each token followed by its similar words, in similarity order.
/// Injected words are not themselves expanded.
pub fn inject_similar(tokens: &TokenSeq, injector: &EmbeddingModel, config: &AugmentConfig) -> TokenSeq {
    let table = neighbours(&mut tokens.iter(), injector, config);
    inject_with(tokens, &table, config)
}

fn augment_records(ds: &Dataset, injector: Injector<'_>, config: &AugmentConfig, prov: &AugmentProvenance) -> Dataset {
    let docs: Vec<TokenSeq> = ds.records.iter().map(|r| TokenSeq::from_text(&r.text)).collect();
    let table = neighbours(&mut docs.iter().flat_map(|d| d.iter()), injector.model, config);
    let prov_json = serde_json::to_value(prov).expect("provenance serialises");
    let records = ds
        .records
        .iter()
        .zip(&docs)
        .map(|(r, d)| {
            let mut r = r.clone();
            r.text = inject_with(d, &table, config).join();
            r.provenance = Some(prov_json.clone());
            r
        })
        .collect();
    ds.with_records(records)
}

fn provenance(mode: AugmentMode, injector: Injector<'_>, config: &AugmentConfig) -> AugmentProvenance {
    AugmentProvenance {
        mode,
        injector: injector.model.fingerprint().to_string(),
        injector_source: injector.source.map(str::to_string),
        config: config.clone(),
        separation: "caller-asserted".into(),
    }
}

/// Injects the dataset's own domain vocabulary into every record.
pub fn total_domain_augment(
    ds: &Dataset,
    injector: Injector<'_>,
    config: &AugmentConfig,
) -> Result<Dataset, AugmentError> {
    config.validate()?;
    let prov = provenance(AugmentMode::TotalDomain, injector, config);
    Ok(augment_records(ds, injector, config, &prov))
}

/// Training records receive test-domain words and test records receive
/// training-domain words.
pub fn cross_domain_transfer(
    train_ds: &Dataset,
    test_ds: &Dataset,
    injector_train_domain: Injector<'_>,
    injector_test_domain: Injector<'_>,
    config: &AugmentConfig,
) -> Result<AugmentedPair, AugmentError> {
    config.validate()?;
    let same = injector_train_domain.model.fingerprint() == injector_test_domain.model.fingerprint();
    let (train_prov, test_prov) = if same {
        (
            provenance(AugmentMode::TotalDomain, injector_test_domain, config),
            provenance(AugmentMode::TotalDomain, injector_train_domain, config),
        )
    } else {
        (
            provenance(AugmentMode::CrossDomain, injector_test_domain, config),
            provenance(AugmentMode::CrossDomain, injector_train_domain, config),
        )
    };
    Ok(AugmentedPair {
        train: augment_records(train_ds, injector_test_domain, config, &train_prov),
        test: augment_records(test_ds, injector_train_domain, config, &test_prov),
        train_provenance: train_prov,
        test_provenance: test_prov,
        warning: same.then(|| {
            "both injectors are the same embedding; cross-domain transfer degenerates to total-domain augmentation"
                .to_string()
        }),
    })
}
