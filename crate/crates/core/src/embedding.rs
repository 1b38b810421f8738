//! Skipgram word embeddings with negative sampling, enriched with hashed
//! character n-gram (subword) vectors.
//!
//! A word's composed vector is its own vector plus the mean of its subword
//! vectors. Words outside the vocabulary are represented by the mean of their
//! subword vectors alone, so every query gets a vector unless none of its
//! n-grams were ever trained.
//!
//! Subword vectors are stored sparsely: only buckets reached by some
//! vocabulary word hold a row. Untouched buckets read as zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::derive_seed;
use crate::seeded_rng;
use crate::textproc::TokenSeq;

pub const FORMAT_MAGIC: &str = "design-miner-emb";
pub const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub negative_samples: usize,
    pub min_count: usize,
    pub min_word_len: usize,
    pub max_word_len: usize,
    /// Tokens longer than this are dropped from the training stream entirely.
    pub max_token_len: usize,
    pub subword_min_n: usize,
    pub subword_max_n: usize,
    pub bucket_count: usize,
    pub initial_lr: f64,
    pub seed: u64,
    /// 1 trains deterministically. More shards the corpus per epoch and
    /// averages the shard models, which is not bit-identical to 1 thread.
    pub threads: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 300,
            epochs: 10,
            window: 5,
            negative_samples: 5,
            min_count: 5,
            min_word_len: 4,
            max_word_len: 20,
            max_token_len: 25,
            subword_min_n: 3,
            subword_max_n: 6,
            bucket_count: 1 << 21,
            initial_lr: 0.05,
            seed: 42,
            threads: 1,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::InvalidConfig(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if !(self.min_word_len <= self.max_word_len && self.max_word_len <= self.max_token_len) {
            return bad("length bounds must satisfy min_word_len <= max_word_len <= max_token_len");
        }
        if self.subword_min_n == 0 || self.subword_min_n > self.subword_max_n {
            return bad("subword n-gram range must satisfy 1 <= min_n <= max_n");
        }
        if self.bucket_count == 0 || self.bucket_count > u32::MAX as usize {
            return bad("bucket_count must be in 1..=2^32-1");
        }
        if self.window == 0 {
            return bad("window must be >= 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("invalid embedding config: {0}")]
    InvalidConfig(String),
    #[error("vocabulary is empty after filtering ({surviving} words survived)")]
    EmptyVocabulary { surviving: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported embedding file version {found:?} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: String },
    #[error("embedding file truncated or malformed at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_words: usize,
    pub unique_words: usize,
}

pub fn corpus_stats(corpus: &[TokenSeq]) -> CorpusStats {
    let mut seen = std::collections::HashSet::new();
    let mut total = 0;
    for doc in corpus {
        for t in doc.iter() {
            total += 1;
            seen.insert(t);
        }
    }
    CorpusStats {
        total_words: total,
        unique_words: seen.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarWord {
    pub word: String,
    pub similarity: f64,
}

/// Vector for a query word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVector {
    pub values: Vec<f32>,
    pub in_vocab: bool,
    /// True when no component was available and `values` is all zero.
    pub is_zero: bool,
}

/// FNV-1a over UTF-8 bytes.
pub fn subword_hash(ngram: &str) -> u32 {
    let mut h: u32 = 2_166_136_261;
    for b in ngram.bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(16_777_619);
    }
    h
}

/// Character n-grams of `<word>` for n in `min_n..=max_n`.
pub fn char_ngrams(word: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for n in min_n..=max_n {
        if n > chars.len() {
            break;
        }
        for start in 0..=chars.len() - n {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out
}

fn subword_buckets(word: &str, min_n: usize, max_n: usize, bucket_count: usize) -> Vec<u32> {
    char_ngrams(word, min_n, max_n)
        .iter()
        .map(|g| (subword_hash(g) as usize % bucket_count) as u32)
        .collect()
}

#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    config: EmbeddingConfig,
    words: Vec<String>,
    vocab: HashMap<String, usize>,
    word_vectors: Vec<f32>,
    subword_vectors: BTreeMap<u32, Vec<f32>>,
    subwords: Vec<Vec<u32>>,
    normalized: OnceLock<Vec<f64>>,
    fingerprint: OnceLock<String>,
}

impl PartialEq for EmbeddingModel {
    fn eq(&self, other: &Self) -> bool {
        self.config.dim == other.config.dim
            && self.config.bucket_count == other.config.bucket_count
            && self.config.subword_min_n == other.config.subword_min_n
            && self.config.subword_max_n == other.config.subword_max_n
            && self.words == other.words
            && self.word_vectors == other.word_vectors
            && self.subword_vectors == other.subword_vectors
    }
}

impl EmbeddingModel {
    fn assemble(
        config: EmbeddingConfig,
        words: Vec<String>,
        word_vectors: Vec<f32>,
        subword_vectors: BTreeMap<u32, Vec<f32>>,
    ) -> Self {
        let vocab = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let subwords = words
            .iter()
            .map(|w| {
                if subword_vectors.is_empty() {
                    Vec::new()
                } else {
                    subword_buckets(w, config.subword_min_n, config.subword_max_n, config.bucket_count)
                }
            })
            .collect();
        Self {
            config,
            words,
            vocab,
            word_vectors,
            subword_vectors,
            subwords,
            normalized: OnceLock::new(),
            fingerprint: OnceLock::new(),
        }
    }

    /// A model with plain word vectors and no subword table.
    pub fn from_vectors(words: Vec<String>, vectors: Vec<Vec<f32>>) -> Result<Self, EmbeddingError> {
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || words.is_empty() {
            return Err(EmbeddingError::EmptyVocabulary { surviving: words.len() });
        }
        if words.len() != vectors.len() {
            return Err(EmbeddingError::DimensionMismatch(words.len(), vectors.len()));
        }
        let mut flat = Vec::with_capacity(words.len() * dim);
        for v in &vectors {
            if v.len() != dim {
                return Err(EmbeddingError::DimensionMismatch(dim, v.len()));
            }
            flat.extend_from_slice(v);
        }
        let max_len = words.iter().map(|w| w.chars().count()).max().unwrap_or(1);
        let config = foreign_config(dim, max_len);
        Ok(Self::assemble(config, words, flat, BTreeMap::new()))
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.vocab.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.contains_key(word)
    }

    pub fn subword_rows(&self) -> usize {
        self.subword_vectors.len()
    }

    /// Raw (uncomposed) vector of a vocabulary word.
    pub fn raw_word_vector(&self, index: usize) -> &[f32] {
        let d = self.config.dim;
        &self.word_vectors[index * d..(index + 1) * d]
    }

    fn add_subword_mean(&self, buckets: &[u32], out: &mut [f32]) -> bool {
        if buckets.is_empty() {
            return false;
        }
        let scale = 1.0 / buckets.len() as f32;
        let mut any = false;
        for b in buckets {
            if let Some(v) = self.subword_vectors.get(b) {
                any = true;
                for (o, x) in out.iter_mut().zip(v) {
                    *o += x * scale;
                }
            }
        }
        any
    }

    fn composed_by_index(&self, index: usize) -> Vec<f32> {
        let mut v = self.raw_word_vector(index).to_vec();
        self.add_subword_mean(&self.subwords[index], &mut v);
        v
    }

    /// Composed vector for any word; out-of-vocabulary words use subwords only.
    pub fn word_vector(&self, word: &str) -> WordVector {
        if let Some(i) = self.index_of(word) {
            return WordVector {
                values: self.composed_by_index(i),
                in_vocab: true,
                is_zero: false,
            };
        }
        let mut values = vec![0.0f32; self.config.dim];
        let any = if self.subword_vectors.is_empty() {
            false
        } else {
            let buckets = subword_buckets(
                word,
                self.config.subword_min_n,
                self.config.subword_max_n,
                self.config.bucket_count,
            );
            self.add_subword_mean(&buckets, &mut values)
        };
        WordVector {
            values,
            in_vocab: false,
            is_zero: !any,
        }
    }

    fn normalized_matrix(&self) -> &[f64] {
        self.normalized.get_or_init(|| {
            let d = self.config.dim;
            let mut out = vec![0.0f64; self.words.len() * d];
            out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
                let v = self.composed_by_index(i);
                let norm = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for (o, &x) in row.iter_mut().zip(&v) {
                        *o = f64::from(x) / norm;
                    }
                }
            });
            out
        })
    }

    /// Stable content hash identifying this model.
    pub fn fingerprint(&self) -> &str {
        self.fingerprint.get_or_init(|| {
            let mut h = Sha256::new();
            h.update(format!(
                "{} {} {} {}",
                self.config.dim, self.config.bucket_count, self.config.subword_min_n, self.config.subword_max_n
            ));
            for w in &self.words {
                h.update(w.as_bytes());
                h.update([0u8]);
            }
            for x in &self.word_vectors {
                h.update(x.to_le_bytes());
            }
            for (b, v) in &self.subword_vectors {
                h.update(b.to_le_bytes());
                for x in v {
                    h.update(x.to_le_bytes());
                }
            }
            hex::encode(&h.finalize()[..12])
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<(), EmbeddingError> {
        let c = &self.config;
        writeln!(
            out,
            "{FORMAT_MAGIC} {FORMAT_VERSION} {} {} {} {} {} compose=word+mean-subwords subword_rows={} min_word_len={} max_word_len={} max_token_len={}",
            self.words.len(),
            c.dim,
            c.bucket_count,
            c.subword_min_n,
            c.subword_max_n,
            self.subword_vectors.len(),
            c.min_word_len,
            c.max_word_len,
            c.max_token_len,
        )?;
        for (i, w) in self.words.iter().enumerate() {
            write!(out, "{w}")?;
            write_floats(out, self.raw_word_vector(i))?;
        }
        for (b, v) in &self.subword_vectors {
            write!(out, "#{b}")?;
            write_floats(out, v)?;
        }
        Ok(())
    }

    /// Loads the native format, word2vec text (`<count> <dim>` header) or
    /// headerless GloVe text.
    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, EmbeddingError> {
        let mut lines = OffsetLines::new(reader);
        let Some((offset, header)) = lines.next_line()? else {
            return Err(EmbeddingError::Format {
                offset: 0,
                message: "empty file".into(),
            });
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.first() == Some(&FORMAT_MAGIC) {
            return read_native(&fields, offset, lines);
        }
        let numeric_header = fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok());
        if numeric_header {
            let n: usize = fields[0].parse().unwrap_or(0);
            let dim: usize = fields[1].parse().unwrap_or(0);
            let mut words = Vec::with_capacity(n);
            let mut flat = Vec::with_capacity(n * dim);
            for i in 0..n {
                let Some((off, line)) = lines.next_line()? else {
                    return Err(EmbeddingError::Format {
                        offset: lines.offset,
                        message: format!("expected {n} word lines, found {i}"),
                    });
                };
                let (w, v) = parse_vector_line(&line, dim, off)?;
                words.push(w);
                flat.extend(v);
            }
            let max_len = words.iter().map(|w| w.chars().count()).max().unwrap_or(1);
            return Ok(Self::assemble(
                foreign_config(dim, max_len),
                words,
                flat,
                BTreeMap::new(),
            ));
        }
        // headerless: first line is already a vector
        let dim = fields.len().saturating_sub(1);
        if dim == 0 {
            return Err(EmbeddingError::Format {
                offset,
                message: "unrecognised header".into(),
            });
        }
        let (w, v) = parse_vector_line(&header, dim, offset)?;
        let mut words = vec![w];
        let mut flat = v;
        while let Some((off, line)) = lines.next_line()? {
            if line.trim().is_empty() {
                continue;
            }
            let (w, v) = parse_vector_line(&line, dim, off)?;
            words.push(w);
            flat.extend(v);
        }
        let max_len = words.iter().map(|w| w.chars().count()).max().unwrap_or(1);
        Ok(Self::assemble(
            foreign_config(dim, max_len),
            words,
            flat,
            BTreeMap::new(),
        ))
    }
}

fn foreign_config(dim: usize, max_len: usize) -> EmbeddingConfig {
    EmbeddingConfig {
        dim,
        min_count: 1,
        min_word_len: 1,
        max_word_len: max_len.max(1),
        max_token_len: max_len.max(1),
        ..EmbeddingConfig::default()
    }
}

fn write_floats<W: Write>(out: &mut W, values: &[f32]) -> std::io::Result<()> {
    for x in values {
        write!(out, " {}", format_float(*x))?;
    }
    writeln!(out)
}

/// Six significant digits in scientific notation.
pub fn format_float(x: f32) -> String {
    format!("{x:.5e}")
}

fn quantize(x: f32) -> f32 {
    format_float(x).parse().unwrap_or(x)
}

struct OffsetLines<R> {
    reader: R,
    offset: u64,
}

impl<R: BufRead> OffsetLines<R> {
    fn new(reader: R) -> Self {
        Self { reader, offset: 0 }
    }

    /// Returns the next line and the byte offset where it starts.
    fn next_line(&mut self) -> Result<Option<(u64, String)>, EmbeddingError> {
        let start = self.offset;
        let mut buf = String::new();
        let n = self.reader.read_line(&mut buf)?;
        if n == 0 {
            return Ok(None);
        }
        self.offset += n as u64;
        while buf.ends_with('\n') || buf.ends_with('\r') {
            buf.pop();
        }
        Ok(Some((start, buf)))
    }
}

fn parse_vector_line(line: &str, dim: usize, offset: u64) -> Result<(String, Vec<f32>), EmbeddingError> {
    let mut parts = line.split(' ').filter(|p| !p.is_empty());
    let word = parts
        .next()
        .ok_or_else(|| EmbeddingError::Format {
            offset,
            message: "empty vector line".into(),
        })?
        .to_string();
    let mut values = Vec::with_capacity(dim);
    for p in parts {
        let x: f32 = p.parse().map_err(|_| EmbeddingError::Format {
            offset,
            message: format!("bad float {p:?} for {word:?}"),
        })?;
        if !x.is_finite() {
            return Err(EmbeddingError::Format {
                offset,
                message: format!("non-finite value for {word:?}"),
            });
        }
        values.push(x);
    }
    if values.len() != dim {
        return Err(EmbeddingError::Format {
            offset,
            message: format!("{word:?} has {} values, expected {dim}", values.len()),
        });
    }
    Ok((word, values))
}

fn read_native<R: BufRead>(
    fields: &[&str],
    header_offset: u64,
    mut lines: OffsetLines<R>,
) -> Result<EmbeddingModel, EmbeddingError> {
    let version = fields.get(1).copied().unwrap_or("");
    if version != FORMAT_VERSION {
        return Err(EmbeddingError::VersionMismatch {
            found: version.to_string(),
        });
    }
    let bad_header = |m: &str| EmbeddingError::Format {
        offset: header_offset,
        message: m.to_string(),
    };
    if fields.len() < 7 {
        return Err(bad_header("header needs vocab, dim, buckets, min_n, max_n"));
    }
    let num = |i: usize| {
        fields[i]
            .parse::<usize>()
            .map_err(|_| bad_header("non-numeric header field"))
    };
    let (n, dim, buckets, min_n, max_n) = (num(2)?, num(3)?, num(4)?, num(5)?, num(6)?);
    let mut extras = HashMap::new();
    for kv in &fields[7..] {
        if let Some((k, v)) = kv.split_once('=') {
            extras.insert(k, v);
        }
    }
    let extra = |k: &str, default: usize| extras.get(k).and_then(|v| v.parse().ok()).unwrap_or(default);
    let defaults = EmbeddingConfig::default();
    let config = EmbeddingConfig {
        dim,
        bucket_count: buckets,
        subword_min_n: min_n,
        subword_max_n: max_n,
        min_word_len: extra("min_word_len", defaults.min_word_len),
        max_word_len: extra("max_word_len", defaults.max_word_len),
        max_token_len: extra("max_token_len", defaults.max_token_len),
        ..defaults
    };
    let expected_rows: Option<usize> = extras.get("subword_rows").and_then(|v| v.parse().ok());

    let mut words = Vec::with_capacity(n);
    let mut flat = Vec::with_capacity(n * dim);
    for i in 0..n {
        let Some((off, line)) = lines.next_line()? else {
            return Err(EmbeddingError::Format {
                offset: lines.offset,
                message: format!("expected {n} word lines, found {i}"),
            });
        };
        let (w, v) = parse_vector_line(&line, dim, off)?;
        words.push(w);
        flat.extend(v);
    }
    let mut subword_vectors = BTreeMap::new();
    while let Some((off, line)) = lines.next_line()? {
        if line.trim().is_empty() {
            continue;
        }
        let (tag, v) = parse_vector_line(&line, dim, off)?;
        let bucket = tag
            .strip_prefix('#')
            .and_then(|b| b.parse::<u32>().ok())
            .ok_or_else(|| EmbeddingError::Format {
                offset: off,
                message: format!("bad bucket line {tag:?}"),
            })?;
        subword_vectors.insert(bucket, v);
    }
    if let Some(rows) = expected_rows {
        if rows != subword_vectors.len() {
            return Err(EmbeddingError::Format {
                offset: lines.offset,
                message: format!("expected {rows} subword rows, found {}", subword_vectors.len()),
            });
        }
    }
    Ok(EmbeddingModel::assemble(config, words, flat, subword_vectors))
}

pub fn save_embedding(model: &EmbeddingModel, path: &Path) -> Result<(), EmbeddingError> {
    model.save(path)
}

pub fn load_embedding(path: &Path) -> Result<EmbeddingModel, EmbeddingError> {
    EmbeddingModel::load(path)
}

/// `a·b / (|a||b|)`, 0 when either norm is zero.
pub fn cosine_similarity(a: &[f32], b: &[f32]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::DimensionMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Vocabulary words (other than `word`) with cosine ≥ `cutoff`, best first,
/// ties broken lexicographically, at most `k`.
pub fn most_similar(model: &EmbeddingModel, word: &str, k: usize, cutoff: f64) -> Vec<SimilarWord> {
    let query = model.word_vector(word);
    if query.is_zero || k == 0 {
        return Vec::new();
    }
    let qnorm = query
        .values
        .iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt();
    if qnorm == 0.0 {
        return Vec::new();
    }
    let q: Vec<f64> = query.values.iter().map(|&x| f64::from(x) / qnorm).collect();
    let d = model.dim();
    let matrix = model.normalized_matrix();
    let mut hits: Vec<SimilarWord> = matrix
        .chunks(d)
        .enumerate()
        .filter_map(|(i, row)| {
            if model.words[i] == word {
                return None;
            }
            let s: f64 = row.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            (s >= cutoff).then(|| SimilarWord {
                word: model.words[i].clone(),
                similarity: s,
            })
        })
        .collect();
    hits.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.word.cmp(&b.word)));
    hits.truncate(k);
    hits
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Loss of one skipgram example under negative sampling:
/// `-ln σ(h·o⁺) - Σ ln σ(-h·o⁻)` with `h = word + mean(subwords)`.
pub fn negative_sampling_loss(word: &[f64], subwords: &[Vec<f64>], positive: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let h = compose_f64(word, subwords);
    let mut loss = -log_sigmoid(dot64(&h, positive));
    for n in negatives {
        loss -= log_sigmoid(-dot64(&h, n));
    }
    loss
}

/// Analytic gradient of [`negative_sampling_loss`] with respect to each input.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSamplingGradient {
    pub word: Vec<f64>,
    pub subwords: Vec<Vec<f64>>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn negative_sampling_gradient(
    word: &[f64],
    subwords: &[Vec<f64>],
    positive: &[f64],
    negatives: &[Vec<f64>],
) -> NegativeSamplingGradient {
    let h = compose_f64(word, subwords);
    let mut grad_h = vec![0.0; h.len()];
    // d/dz of -ln σ(z) is σ(z) - 1; of -ln σ(-z) is σ(z)
    let gp = sigmoid(dot64(&h, positive)) - 1.0;
    axpy(&mut grad_h, gp, positive);
    let positive_grad: Vec<f64> = h.iter().map(|x| gp * x).collect();
    let mut negative_grads = Vec::with_capacity(negatives.len());
    for n in negatives {
        let gn = sigmoid(dot64(&h, n));
        axpy(&mut grad_h, gn, n);
        negative_grads.push(h.iter().map(|x| gn * x).collect());
    }
    let scale = if subwords.is_empty() {
        0.0
    } else {
        1.0 / subwords.len() as f64
    };
    NegativeSamplingGradient {
        subwords: subwords
            .iter()
            .map(|_| grad_h.iter().map(|g| g * scale).collect())
            .collect(),
        word: grad_h,
        positive: positive_grad,
        negatives: negative_grads,
    }
}

fn compose_f64(word: &[f64], subwords: &[Vec<f64>]) -> Vec<f64> {
    let mut h = word.to_vec();
    if !subwords.is_empty() {
        let s = 1.0 / subwords.len() as f64;
        for v in subwords {
            axpy(&mut h, s, v);
        }
    }
    h
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Per-epoch diagnostics collected when loss tracking is on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub vocab_size: usize,
    pub training_tokens: usize,
    pub corpus: Option<CorpusStats>,
    /// Mean negative-sampling loss per (center, context) pair over the whole
    /// corpus, measured with the parameters at the end of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Mutable training state. Subword rows are dense over the buckets the
/// vocabulary reaches.
#[derive(Clone)]
struct Params {
    dim: usize,
    input: Vec<f32>,
    subword: Vec<f32>,
    output: Vec<f32>,
}

struct Layout {
    words: Vec<String>,
    /// compact subword row indices per vocabulary word
    subwords: Vec<Vec<u32>>,
    /// compact row → bucket id
    buckets: Vec<u32>,
    sentences: Vec<Vec<u32>>,
    sampler: WeightedIndex<f64>,
}

impl Params {
    fn hidden(&self, layout: &Layout, center: usize, h: &mut [f32]) {
        let d = self.dim;
        h.copy_from_slice(&self.input[center * d..(center + 1) * d]);
        let subs = &layout.subwords[center];
        if !subs.is_empty() {
            let s = 1.0 / subs.len() as f32;
            for &r in subs {
                let row = &self.subword[r as usize * d..(r as usize + 1) * d];
                for (x, y) in h.iter_mut().zip(row) {
                    *x += s * y;
                }
            }
        }
    }

    /// One SGD step on a (center, context, negatives) example.
    fn update(
        &mut self,
        layout: &Layout,
        center: usize,
        targets: &[(usize, bool)],
        lr: f32,
        h: &mut [f32],
        grad: &mut [f32],
    ) {
        let d = self.dim;
        self.hidden(layout, center, h);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for &(t, label) in targets {
            let out = &mut self.output[t * d..(t + 1) * d];
            let f: f32 = h.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
            let p = sigmoid(f64::from(f)) as f32;
            let g = lr * (f32::from(u8::from(label)) - p);
            for ((gi, oi), hi) in grad.iter_mut().zip(out.iter_mut()).zip(h.iter()) {
                *gi += g * *oi;
                *oi += g * hi;
            }
        }
        for (x, g) in self.input[center * d..(center + 1) * d].iter_mut().zip(grad.iter()) {
            *x += g;
        }
        let subs = &layout.subwords[center];
        if !subs.is_empty() {
            let s = 1.0 / subs.len() as f32;
            for &r in subs {
                let row = &mut self.subword[r as usize * d..(r as usize + 1) * d];
                for (x, g) in row.iter_mut().zip(grad.iter()) {
                    *x += s * g;
                }
            }
        }
    }

    fn average(shards: &[Params]) -> Params {
        let mut out = shards[0].clone();
        let k = shards.len() as f32;
        for buf in [&mut out.input, &mut out.subword, &mut out.output] {
            buf.iter_mut().for_each(|x| *x = 0.0);
        }
        for s in shards {
            for (o, x) in out.input.iter_mut().zip(&s.input) {
                *o += x / k;
            }
            for (o, x) in out.subword.iter_mut().zip(&s.subword) {
                *o += x / k;
            }
            for (o, x) in out.output.iter_mut().zip(&s.output) {
                *o += x / k;
            }
        }
        out
    }
}

fn build_layout(corpus: &[TokenSeq], config: &EmbeddingConfig) -> Result<Layout, EmbeddingError> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for t in doc.iter() {
            *counts.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|(w, c)| {
            let n = w.chars().count();
            *c >= config.min_count && n >= config.min_word_len && n <= config.max_word_len
        })
        .collect();
    if kept.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary { surviving: 0 });
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
    let index: HashMap<&str, u32> = kept.iter().enumerate().map(|(i, (w, _))| (*w, i as u32)).collect();

    let mut bucket_rows: BTreeMap<u32, u32> = BTreeMap::new();
    let raw: Vec<Vec<u32>> = words
        .iter()
        .map(|w| subword_buckets(w, config.subword_min_n, config.subword_max_n, config.bucket_count))
        .collect();
    for b in raw.iter().flatten() {
        bucket_rows.entry(*b).or_insert(0);
    }
    for (row, v) in bucket_rows.values_mut().enumerate() {
        *v = row as u32;
    }
    let subwords = raw
        .iter()
        .map(|bs| bs.iter().map(|b| bucket_rows[b]).collect())
        .collect();
    let buckets = bucket_rows.keys().copied().collect();

    // Overlong tokens leave the stream entirely; out-of-vocabulary ones are skipped.
    let sentences: Vec<Vec<u32>> = corpus
        .iter()
        .map(|doc| {
            doc.iter()
                .filter(|t| t.chars().count() <= config.max_token_len)
                .filter_map(|t| index.get(t).copied())
                .collect()
        })
        .filter(|s: &Vec<u32>| !s.is_empty())
        .collect();
    let weights: Vec<f64> = kept.iter().map(|(_, c)| (*c as f64).powf(0.75)).collect();
    let sampler = WeightedIndex::new(weights).map_err(|e| EmbeddingError::InvalidConfig(e.to_string()))?;
    Ok(Layout {
        words,
        subwords,
        buckets,
        sentences,
        sampler,
    })
}

fn init_params(layout: &Layout, config: &EmbeddingConfig) -> Params {
    let d = config.dim;
    let mut rng = seeded_rng(config.seed);
    let bound = 1.0 / d as f32;
    let mut uniform = |n: usize| -> Vec<f32> { (0..n).map(|_| rng.gen_range(-bound..bound)).collect() };
    let input = uniform(layout.words.len() * d);
    let subword = uniform(layout.buckets.len() * d);
    Params {
        dim: d,
        input,
        subword,
        output: vec![0.0; layout.words.len() * d],
    }
}

/// Trains one pass over `sentences`, returning the number of center tokens processed.
#[allow(clippy::too_many_arguments)]
fn train_pass<R: Rng>(
    params: &mut Params,
    layout: &Layout,
    sentences: &[Vec<u32>],
    config: &EmbeddingConfig,
    rng: &mut R,
    mut processed: usize,
    total: usize,
) -> usize {
    let d = config.dim;
    let mut h = vec![0.0f32; d];
    let mut grad = vec![0.0f32; d];
    let mut targets = Vec::with_capacity(config.negative_samples + 1);
    for sentence in sentences {
        for pos in 0..sentence.len() {
            let progress = processed as f64 / total.max(1) as f64;
            let lr = (config.initial_lr * (1.0 - progress)).max(config.initial_lr * 1e-4) as f32;
            let reach = rng.gen_range(1..=config.window);
            let center = sentence[pos] as usize;
            let lo = pos.saturating_sub(reach);
            let hi = (pos + reach).min(sentence.len() - 1);
            for (ctx, &target) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                if ctx == pos {
                    continue;
                }
                let target = target as usize;
                targets.clear();
                targets.push((target, true));
                while targets.len() < config.negative_samples + 1 {
                    let n = layout.sampler.sample(rng);
                    if n != target || layout.words.len() == 1 {
                        targets.push((n, false));
                    }
                }
                params.update(layout, center, &targets, lr, &mut h, &mut grad);
            }
            processed += 1;
        }
    }
    processed
}

/// Mean loss per pair over the full corpus with fixed windows and a fixed
/// negative stream, so that epochs are comparable.
fn corpus_loss(params: &Params, layout: &Layout, config: &EmbeddingConfig) -> f64 {
    let d = config.dim;
    let mut rng = seeded_rng(derive_seed(config.seed, 0xE7A1));
    let mut h = vec![0.0f32; d];
    let mut total = 0.0;
    let mut pairs = 0usize;
    for sentence in &layout.sentences {
        for pos in 0..sentence.len() {
            let center = sentence[pos] as usize;
            params.hidden(layout, center, &mut h);
            let lo = pos.saturating_sub(config.window);
            let hi = (pos + config.window).min(sentence.len() - 1);
            for (ctx, &target) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                if ctx == pos {
                    continue;
                }
                let score = |t: usize| -> f64 {
                    h.iter()
                        .zip(&params.output[t * d..(t + 1) * d])
                        .map(|(a, b)| f64::from(a * b))
                        .sum()
                };
                let mut loss = -log_sigmoid(score(target as usize));
                for _ in 0..config.negative_samples {
                    let n = layout.sampler.sample(&mut rng);
                    loss -= log_sigmoid(-score(n));
                }
                total += loss;
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

pub fn train_embedding(corpus: &[TokenSeq], config: &EmbeddingConfig) -> Result<EmbeddingModel, EmbeddingError> {
    train_embedding_with_report(corpus, config, false).map(|(m, _)| m)
}

/// Trains and optionally records the per-epoch corpus loss.
pub fn train_embedding_with_report(
    corpus: &[TokenSeq],
    config: &EmbeddingConfig,
    track_loss: bool,
) -> Result<(EmbeddingModel, TrainingReport), EmbeddingError> {
    config.validate()?;
    let layout = build_layout(corpus, config)?;
    let mut params = init_params(&layout, config);
    let tokens: usize = layout.sentences.iter().map(Vec::len).sum();
    let total = tokens * config.epochs;
    let mut report = TrainingReport {
        vocab_size: layout.words.len(),
        training_tokens: tokens,
        corpus: Some(corpus_stats(corpus)),
        epoch_losses: Vec::new(),
    };
    let mut processed = 0;
    for epoch in 0..config.epochs {
        if config.threads <= 1 {
            let mut rng = seeded_rng(derive_seed(config.seed, epoch as u64 + 1));
            processed = train_pass(
                &mut params,
                &layout,
                &layout.sentences,
                config,
                &mut rng,
                processed,
                total,
            );
        } else {
            let shards = config.threads.min(layout.sentences.len()).max(1);
            let per = layout.sentences.len().div_ceil(shards);
            let results: Vec<Params> = layout
                .sentences
                .par_chunks(per)
                .enumerate()
                .map(|(s, chunk)| {
                    let mut local = params.clone();
                    let mut rng = seeded_rng(derive_seed(config.seed, ((epoch as u64 + 1) << 16) + s as u64));
                    // each shard sees the schedule position of the epoch start
                    train_pass(&mut local, &layout, chunk, config, &mut rng, processed, total);
                    local
                })
                .collect();
            params = Params::average(&results);
            processed += tokens;
        }
        if track_loss {
            report.epoch_losses.push(corpus_loss(&params, &layout, config));
        }
    }

    let d = config.dim;
    let word_vectors: Vec<f32> = params.input.iter().copied().map(quantize).collect();
    let subword_vectors: BTreeMap<u32, Vec<f32>> = layout
        .buckets
        .iter()
        .enumerate()
        .map(|(row, &b)| {
            (
                b,
                params.subword[row * d..(row + 1) * d]
                    .iter()
                    .copied()
                    .map(quantize)
                    .collect(),
            )
        })
        .collect();
    let model = EmbeddingModel::assemble(config.clone(), layout.words, word_vectors, subword_vectors);
    Ok((model, report))
}

impl fmt::Display for EmbeddingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "embedding[{} words x {} dims, {} subword rows, {}]",
            self.words.len(),
            self.config.dim,
            self.subword_vectors.len(),
            self.fingerprint()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> EmbeddingConfig {
        EmbeddingConfig {
            dim: 16,
            epochs: 3,
            min_count: 1,
            bucket_count: 1 << 12,
            ..EmbeddingConfig::default()
        }
    }

    fn toy_corpus() -> Vec<TokenSeq> {
        (0..40)
            .map(|i| {
                let words = [
                    "pattern", "factory", "builder", "visitor", "adapter", "design", "module",
                ];
                TokenSeq::from_iter((0..8).map(|j| words[(i * 3 + j * 5) % words.len()]))
            })
            .collect()
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3f32, -1.2, 2.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(EmbeddingError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn ngrams_have_boundary_markers() {
        let grams = char_ngrams("ab", 3, 4);
        assert_eq!(grams, vec!["<ab", "ab>", "<ab>"]);
        assert!(char_ngrams("a", 4, 6).is_empty());
    }

    #[test]
    fn vocabulary_respects_bounds() {
        let mut corpus = toy_corpus();
        corpus.push(TokenSeq::from_iter(["abc", "abcdefghijklmnopqrstu", "design"]));
        let model = train_embedding(&corpus, &small_config()).unwrap();
        for w in model.words() {
            let n = w.chars().count();
            assert!((4..=20).contains(&n), "{w}");
        }
        assert!(!model.contains("abc"));
        assert!(!model.contains("abcdefghijklmnopqrstu"));
    }

    #[test]
    fn empty_vocabulary_errors() {
        let corpus = vec![TokenSeq::from_iter(["ab", "cd"])];
        match train_embedding(&corpus, &small_config()) {
            Err(EmbeddingError::EmptyVocabulary { surviving }) => assert_eq!(surviving, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = train_embedding(&toy_corpus(), &small_config()).unwrap();
        let b = train_embedding(&toy_corpus(), &small_config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn word_vector_cases() {
        let model = train_embedding(&toy_corpus(), &small_config()).unwrap();
        let v = model.word_vector("design");
        assert!(v.in_vocab && v.values.len() == 16 && v.values.iter().all(|x| x.is_finite()));

        // an OOV word's vector is the mean of its subword rows
        let oov = model.word_vector("designs");
        assert!(!oov.in_vocab && !oov.is_zero);

        // "<x>" is shorter than every 4-gram, so it has no subwords at all
        let cfg = EmbeddingConfig {
            subword_min_n: 4,
            ..small_config()
        };
        let m4 = train_embedding(&toy_corpus(), &cfg).unwrap();
        let tiny = m4.word_vector("x");
        assert!(tiny.is_zero && tiny.values.iter().all(|&x| x == 0.0));
        assert_eq!(tiny.values.len(), 16);
    }

    #[test]
    fn oov_matches_subword_part_of_identical_string() {
        // "rarely" appears once and is filtered by min_count=2, but its n-grams overlap "rare"
        let mut corpus = toy_corpus();
        corpus.push(TokenSeq::from_iter(["rare", "rare", "rarely"]));
        let cfg = EmbeddingConfig {
            min_count: 2,
            ..small_config()
        };
        let model = train_embedding(&corpus, &cfg).unwrap();
        assert!(!model.contains("rarely"));
        let a = model.word_vector("rarely");
        let b = model.word_vector("rarely");
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_and_fixture() {
        let model = train_embedding(&toy_corpus(), &small_config()).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        let back = EmbeddingModel::read_from(&buf[..]).unwrap();
        assert_eq!(model, back);

        let fixture = "2 3\nfoo 1 0 0\nbar 0.5 0.5 0\n";
        let m = EmbeddingModel::read_from(fixture.as_bytes()).unwrap();
        assert_eq!((m.vocab_len(), m.dim()), (2, 3));
        assert_eq!(m.word_vector("bar").values, vec![0.5, 0.5, 0.0]);
        assert!(m.word_vector("baz").is_zero);

        let glove = "foo 1 0\nbar 0 1\n";
        let g = EmbeddingModel::read_from(glove.as_bytes()).unwrap();
        assert_eq!((g.vocab_len(), g.dim()), (2, 2));
    }

    #[test]
    fn truncated_file_names_offset() {
        let model = train_embedding(&toy_corpus(), &small_config()).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        let cut = buf.len() / 3;
        match EmbeddingModel::read_from(&buf[..cut]) {
            Err(EmbeddingError::Format { offset, .. }) => assert!(offset as usize <= cut),
            other => panic!("unexpected {other:?}"),
        }
        let fixture = "3 2\nfoo 1 0\nbar 0 1\n";
        match EmbeddingModel::read_from(fixture.as_bytes()) {
            Err(EmbeddingError::Format { offset, .. }) => assert_eq!(offset, fixture.len() as u64),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let text = "design-miner-emb v2 1 2 10 3 6\nfoo 1 0\n";
        assert!(matches!(
            EmbeddingModel::read_from(text.as_bytes()),
            Err(EmbeddingError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn most_similar_ordering_and_cutoff() {
        let words = vec!["alpha".to_string(), "beta".into(), "gamma".into(), "delta".into()];
        let vecs = vec![vec![1.0, 0.0], vec![0.9, 0.1], vec![0.9, 0.1], vec![0.0, 1.0]];
        let m = EmbeddingModel::from_vectors(words, vecs).unwrap();
        let hits = most_similar(&m, "alpha", 10, 0.5);
        let names: Vec<_> = hits.iter().map(|h| h.word.as_str()).collect();
        assert_eq!(names, vec!["beta", "gamma"]);
        assert!(hits.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        assert!(most_similar(&m, "alpha", 10, 1.0).is_empty());
        assert_eq!(most_similar(&m, "alpha", 1, -1.0).len(), 1);
        let direct = cosine_similarity(&m.word_vector("alpha").values, &m.word_vector("beta").values).unwrap();
        assert!((hits[0].similarity - direct).abs() < 1e-12);
    }

    #[test]
    fn parallel_mode_trains() {
        let cfg = EmbeddingConfig {
            threads: 4,
            ..small_config()
        };
        let model = train_embedding(&toy_corpus(), &cfg).unwrap();
        assert!(model.word_vector("design").values.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn update_step_follows_analytic_gradient() {
        let corpus = vec![TokenSeq::from_iter(["alpha", "bravo", "charlie", "delta"])];
        let cfg = EmbeddingConfig {
            dim: 5,
            min_count: 1,
            bucket_count: 97,
            ..EmbeddingConfig::default()
        };
        let layout = build_layout(&corpus, &cfg).unwrap();
        let mut params = init_params(&layout, &cfg);
        let mut rng = seeded_rng(3);
        for x in params.output.iter_mut() {
            *x = rng.gen_range(-0.5..0.5);
        }
        let d = cfg.dim;
        let center = 0;
        let targets = [(1usize, true), (2, false), (3, false)];
        let as64 = |v: &[f32]| v.iter().map(|&x| f64::from(x)).collect::<Vec<f64>>();
        let word = as64(&params.input[..d]);
        let subs: Vec<Vec<f64>> = layout.subwords[center]
            .iter()
            .map(|&r| as64(&params.subword[r as usize * d..(r as usize + 1) * d]))
            .collect();
        let out = |t: usize, p: &Params| as64(&p.output[t * d..(t + 1) * d]);
        let grad = negative_sampling_gradient(&word, &subs, &out(1, &params), &[out(2, &params), out(3, &params)]);
        let before = params.clone();
        let lr = 1e-3f32;
        let (mut h, mut g) = (vec![0.0; d], vec![0.0; d]);
        params.update(&layout, center, &targets, lr, &mut h, &mut g);
        for j in 0..d {
            let delta = f64::from(params.input[j] - before.input[j]);
            assert!((delta + f64::from(lr) * grad.word[j]).abs() < 1e-6);
            let delta = f64::from(params.output[d + j] - before.output[d + j]);
            assert!((delta + f64::from(lr) * grad.positive[j]).abs() < 1e-6);
        }
    }
}
