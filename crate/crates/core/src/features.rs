//! Document representations: n-gram vocabularies, count/presence and TF-IDF
//! matrices, mean-pooled embedding vectors, and n-gram frequency rankings.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingModel;
use crate::textproc::TokenSeq;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no document contains an n-gram in range {0}..={1}")]
    NoNgrams(usize, usize),
    #[error("max_features must be at least 1")]
    ZeroMaxFeatures,
    #[error("invalid n-gram range {0}..={1}")]
    InvalidRange(usize, usize),
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vocabulary file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Count,
    Tfidf,
    EmbeddingMean,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Count => "count",
            Scheme::Tfidf => "tfidf",
            Scheme::EmbeddingMean => "embedding-mean",
        }
    }
}

/// Row-compressed sparse matrix; zeros are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocMatrix {
    n_features: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    pub scheme: Scheme,
}

impl DocMatrix {
    pub fn new(n_features: usize, scheme: Scheme) -> Self {
        Self {
            n_features,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            scheme,
        }
    }

    /// Builds from dense rows, dropping zeros.
    pub fn from_dense(rows: &[Vec<f64>], scheme: Scheme) -> Self {
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        let mut m = Self::new(n_features, scheme);
        for r in rows {
            assert_eq!(r.len(), n_features, "ragged dense rows");
            m.push_row(r.iter().copied().enumerate());
        }
        m
    }

    /// Appends a row from (column, value) pairs in increasing column order.
    pub fn push_row<I: IntoIterator<Item = (usize, f64)>>(&mut self, entries: I) {
        for (j, v) in entries {
            debug_assert!(j < self.n_features);
            if v != 0.0 {
                self.indices.push(j);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> RowView<'_> {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        RowView {
            indices: &self.indices[a..b],
            values: &self.values[a..b],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_dense(self.n_features)).collect()
    }

    /// New matrix made of the given rows (duplicates allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::new(self.n_features, self.scheme);
        for &i in rows {
            let r = self.row(i);
            m.push_row(r.iter());
        }
        m
    }

    pub fn append(&mut self, other: &DocMatrix) {
        assert_eq!(self.n_features, other.n_features);
        for r in other.rows() {
            self.push_row(r.iter());
        }
    }

    /// Row and column of the first non-finite value.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        for i in 0..self.n_rows() {
            let r = self.row(i);
            if let Some(k) = r.values.iter().position(|v| !v.is_finite()) {
                return Some((i, r.indices[k]));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RowView<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> RowView<'a> {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(j, v)| v * dense[j]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (j, v) in self.iter() {
            out[j] = v;
        }
        out
    }

    /// Dot product of two sparse rows.
    pub fn dot_sparse(&self, other: &RowView<'_>) -> f64 {
        let (mut a, mut b, mut s) = (0, 0, 0.0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    s += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        s
    }

    /// Exact merge over both supports, so identical rows are at distance 0.
    pub fn squared_distance(&self, other: &RowView<'_>) -> f64 {
        let (mut a, mut b, mut s) = (0, 0, 0.0);
        loop {
            let d = match (self.indices.get(a), other.indices.get(b)) {
                (None, None) => break,
                (Some(_), None) => {
                    a += 1;
                    self.values[a - 1]
                }
                (None, Some(_)) => {
                    b += 1;
                    other.values[b - 1]
                }
                (Some(i), Some(j)) => match i.cmp(j) {
                    std::cmp::Ordering::Less => {
                        a += 1;
                        self.values[a - 1]
                    }
                    std::cmp::Ordering::Greater => {
                        b += 1;
                        other.values[b - 1]
                    }
                    std::cmp::Ordering::Equal => {
                        a += 1;
                        b += 1;
                        self.values[a - 1] - other.values[b - 1]
                    }
                },
            };
            s += d * d;
        }
        s
    }

    /// Value at column `j` (zero when not stored).
    pub fn get(&self, j: usize) -> f64 {
        self.indices.binary_search(&j).map(|k| self.values[k]).unwrap_or(0.0)
    }
}

fn ngrams_of(tokens: &[String], n: usize) -> impl Iterator<Item = String> + '_ {
    tokens.windows(n).map(|w| w.join(" "))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    pub document_frequency: Vec<usize>,
    pub n_documents: usize,
    pub ngram_range: (usize, usize),
    pub max_features: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    n_documents: usize,
    ngram_range: (usize, usize),
    max_features: Option<usize>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        Self::from_parts(
            d.terms,
            d.document_frequency,
            d.n_documents,
            d.ngram_range,
            d.max_features,
        )
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        Self {
            terms: v.terms,
            document_frequency: v.document_frequency,
            n_documents: v.n_documents,
            ngram_range: v.ngram_range,
            max_features: v.max_features,
        }
    }
}

impl Vocabulary {
    fn from_parts(
        terms: Vec<String>,
        document_frequency: Vec<usize>,
        n_documents: usize,
        ngram_range: (usize, usize),
        max_features: Option<usize>,
    ) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            terms,
            index,
            document_frequency,
            n_documents,
            ngram_range,
            max_features,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Short content hash used to bind trained models to this vocabulary.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(format!(
            "{} {:?} {:?}\n",
            self.n_documents, self.ngram_range, self.max_features
        ));
        for (t, df) in self.terms.iter().zip(&self.document_frequency) {
            h.update(format!("{t}\t{df}\n"));
        }
        hex::encode(&h.finalize()[..12])
    }

    pub fn df(&self, ngram: &str) -> Option<usize> {
        self.get(ngram).map(|i| self.document_frequency[i])
    }

    /// Smoothed idf: `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, column: usize) -> f64 {
        ((1.0 + self.n_documents as f64) / (1.0 + self.document_frequency[column] as f64)).ln() + 1.0
    }

    /// Per-document term counts over the vocabulary, in column order.
    fn counts(&self, doc: &TokenSeq) -> Vec<(usize, f64)> {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for n in self.ngram_range.0..=self.ngram_range.1 {
            for g in ngrams_of(&doc.tokens, n) {
                if let Some(j) = self.get(&g) {
                    *counts.entry(j).or_default() += 1.0;
                }
            }
        }
        let mut v: Vec<(usize, f64)> = counts.into_iter().collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    pub fn to_text(&self, scheme: Scheme) -> String {
        let mut out = format!(
            "# n_documents={} range={}-{} scheme={} max_features={}\n",
            self.n_documents,
            self.ngram_range.0,
            self.ngram_range.1,
            scheme.as_str(),
            self.max_features
                .map(|m| m.to_string())
                .unwrap_or_else(|| "none".into())
        );
        for (i, t) in self.terms.iter().enumerate() {
            let _ = writeln!(out, "{t}\t{i}\t{}", self.document_frequency[i]);
        }
        out
    }

    pub fn save(&self, path: &Path, scheme: Scheme) -> Result<(), FeatureError> {
        fs::write(path, self.to_text(scheme))?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<(Self, Scheme), FeatureError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| FeatureError::Format("empty file".into()))?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| FeatureError::Format("missing header".into()))?;
        let mut kv = HashMap::new();
        for part in header.split_whitespace() {
            if let Some((k, v)) = part.split_once('=') {
                kv.insert(k, v);
            }
        }
        let field = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| FeatureError::Format(format!("header lacks {k}")))
        };
        let n_documents = field("n_documents")?
            .parse()
            .map_err(|_| FeatureError::Format("bad n_documents".into()))?;
        let (lo, hi) = field("range")?
            .split_once('-')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
            .ok_or_else(|| FeatureError::Format("bad range".into()))?;
        let scheme = match field("scheme")? {
            "count" => Scheme::Count,
            "tfidf" => Scheme::Tfidf,
            "embedding-mean" => Scheme::EmbeddingMean,
            other => return Err(FeatureError::Format(format!("unknown scheme {other}"))),
        };
        let max_features = kv.get("max_features").and_then(|v| v.parse().ok());
        let mut rows: Vec<(usize, String, usize)> = Vec::new();
        for (i, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(FeatureError::Format(format!(
                    "line {}: expected ngram<TAB>index<TAB>df",
                    i + 2
                )));
            }
            let idx = parts[1]
                .parse()
                .map_err(|_| FeatureError::Format(format!("line {}: bad index", i + 2)))?;
            let df = parts[2]
                .parse()
                .map_err(|_| FeatureError::Format(format!("line {}: bad df", i + 2)))?;
            rows.push((idx, parts[0].to_string(), df));
        }
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(FeatureError::Format("indices are not dense".into()));
        }
        let (terms, dfs) = rows.into_iter().map(|(_, t, d)| (t, d)).unzip();
        Ok((
            Self::from_parts(terms, dfs, n_documents, (lo, hi), max_features),
            scheme,
        ))
    }
}

/// Ranks n-grams in `ngram_range` by corpus frequency (ties lexicographic)
/// and keeps the first `max_features`.
pub fn fit_vocabulary(
    corpus: &[TokenSeq],
    ngram_range: (usize, usize),
    max_features: Option<usize>,
) -> Result<Vocabulary, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let (lo, hi) = ngram_range;
    if lo == 0 || lo > hi {
        return Err(FeatureError::InvalidRange(lo, hi));
    }
    if max_features == Some(0) {
        return Err(FeatureError::ZeroMaxFeatures);
    }
    let mut freq: HashMap<String, (usize, usize)> = HashMap::new();
    for doc in corpus {
        let mut seen = std::collections::HashSet::new();
        for n in lo..=hi {
            for g in ngrams_of(&doc.tokens, n) {
                let e = freq.entry(g.clone()).or_default();
                e.0 += 1;
                if seen.insert(g) {
                    e.1 += 1;
                }
            }
        }
    }
    if freq.is_empty() {
        return Err(FeatureError::NoNgrams(lo, hi));
    }
    let mut ranked: Vec<(String, (usize, usize))> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then_with(|| a.0.cmp(&b.0)));
    if let Some(m) = max_features {
        ranked.truncate(m);
    }
    let (terms, dfs): (Vec<String>, Vec<usize>) = ranked.into_iter().map(|(t, (_, df))| (t, df)).unzip();
    Ok(Vocabulary::from_parts(
        terms,
        dfs,
        corpus.len(),
        ngram_range,
        max_features,
    ))
}

/// Raw counts, or 0/1 presence when `binary` is set.
pub fn count_transform(corpus: &[TokenSeq], vocab: &Vocabulary, binary: bool) -> DocMatrix {
    let mut m = DocMatrix::new(vocab.len(), Scheme::Count);
    for doc in corpus {
        let counts = vocab.counts(doc);
        m.push_row(counts.into_iter().map(|(j, c)| (j, if binary { 1.0 } else { c })));
    }
    m
}

/// `tf · idf` with raw counts as tf and L2-normalised rows. Unknown n-grams are ignored.
pub fn tfidf_transform(corpus: &[TokenSeq], vocab: &Vocabulary) -> DocMatrix {
    let mut m = DocMatrix::new(vocab.len(), Scheme::Tfidf);
    for doc in corpus {
        let mut row: Vec<(usize, f64)> = vocab
            .counts(doc)
            .into_iter()
            .map(|(j, c)| (j, c * vocab.idf(j)))
            .collect();
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|(_, v)| *v /= norm);
        }
        m.push_row(row);
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentVector {
    pub values: Vec<f64>,
    /// True for an empty document, whose vector is all zero.
    pub empty: bool,
}

/// Unweighted mean of the tokens' composed word vectors.
pub fn embed_document(tokens: &TokenSeq, model: &EmbeddingModel) -> DocumentVector {
    let mut sum = vec![0.0f64; model.dim()];
    if tokens.is_empty() {
        return DocumentVector {
            values: sum,
            empty: true,
        };
    }
    for t in tokens.iter() {
        for (s, x) in sum.iter_mut().zip(model.word_vector(t).values) {
            *s += f64::from(x);
        }
    }
    let n = tokens.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    DocumentVector {
        values: sum,
        empty: false,
    }
}

pub fn embedding_transform(corpus: &[TokenSeq], model: &EmbeddingModel) -> DocMatrix {
    let mut m = DocMatrix::new(model.dim(), Scheme::EmbeddingMean);
    for doc in corpus {
        let v = embed_document(doc, model);
        m.push_row(v.values.into_iter().enumerate());
    }
    m
}

/// Per-feature standardisation with statistics from the training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DocMatrix) -> Self {
        let d = x.n_features();
        let n = x.n_rows().max(1) as f64;
        let mut mean = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for r in x.rows() {
            for (j, v) in r.iter() {
                mean[j] += v;
                sq[j] += v * v;
            }
        }
        let scale = (0..d)
            .map(|j| {
                mean[j] /= n;
                let var = (sq[j] / n - mean[j] * mean[j]).max(0.0);
                if var > 1e-24 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, x: &DocMatrix) -> Result<DocMatrix, FeatureError> {
        if x.n_features() != self.mean.len() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.mean.len(),
                got: x.n_features(),
            });
        }
        let mut out = DocMatrix::new(x.n_features(), x.scheme);
        for r in x.rows() {
            let dense = r.to_dense(x.n_features());
            out.push_row(
                dense
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (j, (v - self.mean[j]) / self.scale[j])),
            );
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramRanking {
    pub entries: Vec<(String, usize)>,
}

impl NgramRanking {
    pub fn ngrams(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(g, _)| g.as_str())
    }
}

/// The `k` most frequent `n`-grams, ties broken lexicographically.
pub fn top_ngrams(corpus: &[TokenSeq], n: usize, k: usize) -> NgramRanking {
    let mut freq: HashMap<String, usize> = HashMap::new();
    if n > 0 {
        for doc in corpus {
            for g in ngrams_of(&doc.tokens, n) {
                *freq.entry(g).or_default() += 1;
            }
        }
    }
    let mut entries: Vec<(String, usize)> = freq.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(k);
    NgramRanking { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(v: &[&[&str]]) -> Vec<TokenSeq> {
        v.iter().map(|d| TokenSeq::from_iter(d.iter().copied())).collect()
    }

    #[test]
    fn vocabulary_example() {
        let corpus = docs(&[&["a", "b"], &["a"]]);
        let v = fit_vocabulary(&corpus, (1, 1), None).unwrap();
        assert_eq!(v.get("a"), Some(0));
        assert_eq!(v.get("b"), Some(1));
        assert_eq!(v.df("a"), Some(2));
        assert_eq!(v.df("b"), Some(1));
    }

    #[test]
    fn vocabulary_caps_and_errors() {
        let words: Vec<String> = (0..500).map(|i| format!("w{i}")).collect();
        let corpus = vec![TokenSeq::new(words)];
        let v = fit_vocabulary(&corpus, (2, 2), Some(200)).unwrap();
        assert_eq!(v.len(), 200);
        assert!(matches!(
            fit_vocabulary(&corpus, (1, 1), Some(0)),
            Err(FeatureError::ZeroMaxFeatures)
        ));
        assert!(matches!(
            fit_vocabulary(&[], (1, 1), None),
            Err(FeatureError::EmptyCorpus)
        ));
        assert!(matches!(
            fit_vocabulary(&docs(&[&[], &[]]), (1, 1), None),
            Err(FeatureError::NoNgrams(1, 1))
        ));
    }

    #[test]
    fn tfidf_examples() {
        let corpus = docs(&[&["a", "b"], &["a"], &[]]);
        let v = fit_vocabulary(&corpus[..2], (1, 1), None).unwrap();
        assert_eq!(v.idf(0), 1.0);
        assert!((v.idf(1) - ((1.5f64).ln() + 1.0)).abs() < 1e-12);
        let m = tfidf_transform(&corpus, &v);
        let d0 = m.row(0).to_dense(2);
        let (a, b) = (1.0, 1.5f64.ln() + 1.0);
        let norm = (a * a + b * b).sqrt();
        assert!((d0[0] - a / norm).abs() < 1e-12 && (d0[1] - b / norm).abs() < 1e-12);
        assert!((d0[0] - 0.5798).abs() < 1e-4 && (d0[1] - 0.8148).abs() < 1e-4);
        assert_eq!(m.row(2).values.len(), 0);
    }

    #[test]
    fn presence_features() {
        let corpus = docs(&[&["a", "b", "a", "b"]]);
        let v = fit_vocabulary(&corpus, (2, 2), Some(200)).unwrap();
        let m = count_transform(&corpus, &v, true);
        assert!(m.row(0).values.iter().all(|&x| x == 1.0));
        let c = count_transform(&corpus, &v, false);
        assert_eq!(c.row(0).to_dense(v.len())[v.get("a b").unwrap()], 2.0);
    }

    #[test]
    fn top_ngram_examples() {
        let corpus = docs(&[&["a", "b", "c"], &["a", "b", "d"]]);
        let r = top_ngrams(&corpus, 3, 2);
        assert_eq!(r.entries, vec![("a b c".to_string(), 1), ("a b d".to_string(), 1)]);
        assert_eq!(
            top_ngrams(&docs(&[&["a", "a", "b"]]), 1, 1).entries,
            vec![("a".to_string(), 2)]
        );
        assert_eq!(top_ngrams(&corpus, 1, 100).entries.len(), 4);
    }

    #[test]
    fn embed_document_examples() {
        let model = EmbeddingModel::from_vectors(
            vec!["uuu".into(), "vvv".into()],
            vec![vec![1.0, 2.0, -4.0], vec![3.0, 0.0, 2.0]],
        )
        .unwrap();
        let one = embed_document(&TokenSeq::from_iter(["uuu"]), &model);
        assert_eq!(one.values, vec![1.0, 2.0, -4.0]);
        let two = embed_document(&TokenSeq::from_iter(["uuu", "vvv"]), &model);
        assert_eq!(two.values, vec![2.0, 1.0, -1.0]);
        let empty = embed_document(&TokenSeq::default(), &model);
        assert!(empty.empty && empty.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn vocabulary_text_round_trip() {
        let corpus = docs(&[&["x", "y", "z"], &["x", "y"]]);
        let v = fit_vocabulary(&corpus, (1, 2), Some(10)).unwrap();
        let (back, scheme) = Vocabulary::parse(&v.to_text(Scheme::Tfidf)).unwrap();
        assert_eq!(scheme, Scheme::Tfidf);
        assert_eq!(back, v);
    }

    #[test]
    fn standardizer_centres_training_data() {
        let x = DocMatrix::from_dense(&[vec![1.0, 5.0], vec![3.0, 5.0]], Scheme::EmbeddingMean);
        let s = Standardizer::fit(&x);
        let z = s.transform(&x).unwrap().to_dense();
        assert_eq!(z, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }
}
