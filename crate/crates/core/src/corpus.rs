//! Labeled discussion datasets: loading, tag labeling, splitting and summary statistics.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeded_rng;

/// The two discussion classes. `Design` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Design,
    General,
}

impl Label {
    pub fn is_design(self) -> bool {
        self == Label::Design
    }

    pub fn from_design(is_design: bool) -> Self {
        if is_design {
            Label::Design
        } else {
            Label::General
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Design => "design",
            Label::General => "general",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "design" => Ok(Label::Design),
            "general" => Ok(Label::General),
            other => Err(format!("unknown label {other:?} (expected design or general)")),
        }
    }
}

/// One labeled text record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discussion {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub label: Option<Label>,
    pub domain: String,
    /// Set on records written by the augmentation stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl Discussion {
    pub fn new(id: impl Into<String>, text: impl Into<String>, domain: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            tags: Vec::new(),
            label: None,
            domain: domain.into(),
            provenance: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(|t| t.into().to_lowercase()).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub domain: String,
    /// One of `pull-request`, `commit`, `code-comment`, `question`.
    pub artifact_type: String,
    pub records: Vec<Discussion>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, domain: impl Into<String>, records: Vec<Discussion>) -> Self {
        let domain = domain.into();
        Self {
            name: name.into(),
            artifact_type: artifact_type_for_domain(&domain).to_string(),
            domain,
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Labels as design flags. Unlabeled records are an error.
    pub fn design_flags(&self) -> Result<Vec<bool>, CorpusError> {
        self.records
            .iter()
            .map(|r| {
                r.label
                    .map(Label::is_design)
                    .ok_or_else(|| CorpusError::Unlabeled(r.id.clone()))
            })
            .collect()
    }

    /// Classes present among labeled records.
    pub fn classes(&self) -> BTreeSet<Label> {
        self.records.iter().filter_map(|r| r.label).collect()
    }

    /// Copy with the same metadata and a different record list.
    pub fn with_records(&self, records: Vec<Discussion>) -> Self {
        Self {
            name: self.name.clone(),
            domain: self.domain.clone(),
            artifact_type: self.artifact_type.clone(),
            records,
        }
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), CorpusError> {
        let mut out = BufWriter::new(File::create(path)?);
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(|e| CorpusError::Io(e.into()))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Maps a domain identifier onto the artifact kind it carries.
pub fn artifact_type_for_domain(domain: &str) -> &'static str {
    let d = domain.to_lowercase();
    if d.contains("pull") || d.ends_with("-pr") || d.contains("pr-") || d.contains("review") {
        "pull-request"
    } else if d.contains("commit") {
        "commit"
    } else if d.contains("comment") {
        "code-comment"
    } else {
        "question"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// Guesses the format from a file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown dataset format {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("record {0:?} has no label")]
    Unlabeled(String),
    #[error("class {class} is short by {shortfall} records for a balanced split")]
    InsufficientClass { class: Label, shortfall: usize },
    #[error("invalid split sizes: {0}")]
    InvalidSizes(String),
}

#[derive(Deserialize)]
struct JsonRecord {
    id: String,
    text: String,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    label: Option<Label>,
    domain: String,
    #[serde(default)]
    provenance: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct CsvRecord {
    id: String,
    text: String,
    #[serde(default)]
    tags: String,
    #[serde(default)]
    label: String,
    domain: String,
}

/// Loads a dataset; the dataset name is the file stem.
pub fn load_dataset(path: &Path, format: Format) -> Result<Dataset, CorpusError> {
    let records = match format {
        Format::Jsonl => read_jsonl(path)?,
        Format::Csv => read_csv(path)?,
    };
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let domain = records.first().map(|(_, r)| r.domain.clone()).unwrap_or_default();

    let mut seen = HashSet::with_capacity(records.len());
    let mut out = Vec::with_capacity(records.len());
    for (line, rec) in records {
        if rec.text.trim().is_empty() {
            return Err(CorpusError::Malformed {
                line,
                message: "empty text".into(),
            });
        }
        if rec.id.is_empty() {
            return Err(CorpusError::Malformed {
                line,
                message: "empty id".into(),
            });
        }
        if rec.domain != domain {
            return Err(CorpusError::Malformed {
                line,
                message: format!("domain {:?} differs from dataset domain {domain:?}", rec.domain),
            });
        }
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId(rec.id));
        }
        out.push(rec);
    }
    Ok(Dataset::new(name, domain, out))
}

fn read_jsonl(path: &Path) -> Result<Vec<(usize, Discussion)>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((
            line_no,
            Discussion {
                id: rec.id,
                text: rec.text,
                tags: rec.tags.into_iter().map(|t| t.to_lowercase()).collect(),
                label: rec.label,
                domain: rec.domain,
                provenance: rec.provenance,
            },
        ));
    }
    Ok(out)
}

fn read_csv(path: &Path) -> Result<Vec<(usize, Discussion)>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_error)?;
    let mut out = Vec::new();
    for result in reader.deserialize::<CsvRecord>() {
        let rec = result.map_err(csv_error)?;
        // header occupies line 1; quoted fields may span lines so the position is authoritative
        let line_no = out.len() + 2;
        let label = if rec.label.trim().is_empty() || rec.label.trim() == "null" {
            None
        } else {
            Some(
                rec.label
                    .parse::<Label>()
                    .map_err(|message| CorpusError::Malformed { line: line_no, message })?,
            )
        };
        let tags = rec
            .tags
            .split(';')
            .map(|t| t.trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        out.push((
            line_no,
            Discussion {
                id: rec.id,
                text: rec.text,
                tags,
                label,
                domain: rec.domain,
                provenance: None,
            },
        ));
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> CorpusError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CorpusError::Io(io),
        kind => CorpusError::Malformed {
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Stack Overflow tags that mark a discussion as design.
pub const DEFAULT_DESIGN_TAGS: [&str; 10] = [
    "design-patterns",
    "software-design",
    "class-design",
    "design-principles",
    "system-design",
    "code-design",
    "api-design",
    "language-design",
    "dependency-injection",
    "architecture",
];

pub fn default_design_tags() -> HashSet<String> {
    DEFAULT_DESIGN_TAGS.iter().map(|s| s.to_string()).collect()
}

/// `Design` iff any of the record's tags is in `design_tags` (exact match on lowercase).
pub fn label_by_tags(record: &Discussion, design_tags: &HashSet<String>) -> Label {
    let hit = record.tags.iter().any(|t| design_tags.contains(&t.to_lowercase()));
    Label::from_design(hit)
}

/// Applies [`label_by_tags`] to every record. With `overwrite` off, existing labels are kept.
pub fn label_dataset(ds: &mut Dataset, design_tags: &HashSet<String>, overwrite: bool) {
    for r in &mut ds.records {
        if overwrite || r.label.is_none() {
            r.label = Some(label_by_tags(r, design_tags));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn new(train: usize, validation: usize, test: usize) -> Self {
        Self {
            train,
            validation,
            test,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

/// Splits into train/validation/test.
///
/// Without balancing the records are shuffled once and cut in order. With
/// balancing each class is shuffled separately, each split takes half of its
/// size from each class, and each split is shuffled again.
pub fn split_dataset(ds: &Dataset, sizes: SplitSizes, balance: bool, seed: u64) -> Result<SplitDataset, CorpusError> {
    if sizes.total() > ds.len() {
        return Err(CorpusError::InvalidSizes(format!(
            "requested {} records from a dataset of {}",
            sizes.total(),
            ds.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    let parts: [Vec<usize>; 3] = if balance {
        for (name, n) in [
            ("train", sizes.train),
            ("validation", sizes.validation),
            ("test", sizes.test),
        ] {
            if n % 2 != 0 {
                return Err(CorpusError::InvalidSizes(format!("balanced {name} size {n} is odd")));
            }
        }
        let need = sizes.total() / 2;
        let mut per_class = Vec::new();
        for class in [Label::Design, Label::General] {
            let mut idx: Vec<usize> = ds
                .records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.label == Some(class))
                .map(|(i, _)| i)
                .collect();
            if idx.len() < need {
                return Err(CorpusError::InsufficientClass {
                    class,
                    shortfall: need - idx.len(),
                });
            }
            idx.shuffle(&mut rng);
            per_class.push(idx);
        }
        let mut parts: [Vec<usize>; 3] = Default::default();
        let halves = [sizes.train / 2, sizes.validation / 2, sizes.test / 2];
        for class_idx in &per_class {
            let mut offset = 0;
            for (part, half) in parts.iter_mut().zip(halves) {
                part.extend_from_slice(&class_idx[offset..offset + half]);
                offset += half;
            }
        }
        for part in &mut parts {
            part.shuffle(&mut rng);
        }
        parts
    } else {
        let mut idx: Vec<usize> = (0..ds.len()).collect();
        idx.shuffle(&mut rng);
        let a = sizes.train;
        let b = a + sizes.validation;
        let c = b + sizes.test;
        [idx[..a].to_vec(), idx[a..b].to_vec(), idx[b..c].to_vec()]
    };
    let pick = |ix: &[usize], suffix: &str| {
        let mut d = ds.with_records(ix.iter().map(|&i| ds.records[i].clone()).collect());
        d.name = format!("{}-{suffix}", ds.name);
        d
    };
    Ok(SplitDataset {
        train: pick(&parts[0], "train"),
        validation: pick(&parts[1], "validation"),
        test: pick(&parts[2], "test"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub design_count: usize,
    pub mean_discussion_length: f64,
    pub vocabulary_size: usize,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    if ds.is_empty() {
        return DatasetStats {
            total: 0,
            design_count: 0,
            mean_discussion_length: 0.0,
            vocabulary_size: 0,
        };
    }
    let mut vocab = HashSet::new();
    let mut words = 0usize;
    for r in &ds.records {
        for w in r.text.split_whitespace() {
            words += 1;
            vocab.insert(w.to_lowercase());
        }
    }
    DatasetStats {
        total: ds.len(),
        design_count: ds.records.iter().filter(|r| r.label == Some(Label::Design)).count(),
        mean_discussion_length: words as f64 / ds.len() as f64,
        vocabulary_size: vocab.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn jsonl_load_preserves_order() {
        let f = write(
            concat!(
                r#"{"id":"a","text":"first one","tags":["Design-Patterns"],"label":"design","domain":"so"}"#,
                "\n",
                r#"{"id":"b","text":"second","tags":[],"label":null,"domain":"so"}"#,
                "\n"
            ),
            ".jsonl",
        );
        let ds = load_dataset(f.path(), Format::Jsonl).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.records[0].id, "a");
        assert_eq!(ds.records[1].id, "b");
        assert_eq!(ds.records[0].tags, vec!["design-patterns"]);
        assert_eq!(ds.records[1].label, None);
    }

    #[test]
    fn jsonl_missing_label_field_is_absent() {
        let f = write(r#"{"id":"a","text":"x","domain":"so"}"#, ".jsonl");
        let ds = load_dataset(f.path(), Format::Jsonl).unwrap();
        assert_eq!(ds.records[0].label, None);
    }

    #[test]
    fn malformed_jsonl_reports_line() {
        let f = write(
            concat!(r#"{"id":"a","text":"x","domain":"so"}"#, "\n", "{not json\n"),
            ".jsonl",
        );
        match load_dataset(f.path(), Format::Jsonl) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_is_named() {
        let f = write(
            concat!(
                r#"{"id":"a","text":"x","domain":"so"}"#,
                "\n",
                r#"{"id":"a","text":"y","domain":"so"}"#
            ),
            ".jsonl",
        );
        match load_dataset(f.path(), Format::Jsonl) {
            Err(CorpusError::DuplicateId(id)) => assert_eq!(id, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_loads_and_empty_text_errors_at_line() {
        let f = write(
            "id,text,tags,label,domain\n1,hello world,api-design;Java,design,github-pr\n2,,x,general,github-pr\n",
            ".csv",
        );
        match load_dataset(f.path(), Format::Csv) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let f = write(
            "id,text,tags,label,domain\n1,hello world,api-design;Java,design,github-pr\n",
            ".csv",
        );
        let ds = load_dataset(f.path(), Format::Csv).unwrap();
        assert_eq!(ds.records[0].tags, vec!["api-design", "java"]);
        assert_eq!(ds.artifact_type, "pull-request");
    }

    #[test]
    fn tag_labeling_examples() {
        let tags = default_design_tags();
        let r = Discussion::new("1", "x", "so").with_tags(["python", "flutter", "networking", "dart", "raspberry-pi"]);
        assert_eq!(label_by_tags(&r, &tags), Label::General);
        let r = Discussion::new("2", "x", "so").with_tags(["design-patterns", "visitor"]);
        assert_eq!(label_by_tags(&r, &tags), Label::Design);
        let r = Discussion::new("3", "x", "so");
        assert_eq!(label_by_tags(&r, &tags), Label::General);
        // exact match only
        let r = Discussion::new("4", "x", "so").with_tags(["design"]);
        assert_eq!(label_by_tags(&r, &tags), Label::General);
    }

    fn balanced(n_per_class: usize) -> Dataset {
        let records = (0..2 * n_per_class)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Design } else { Label::General };
                Discussion::new(format!("r{i}"), "text", "so").with_label(label)
            })
            .collect();
        Dataset::new("toy", "so", records)
    }

    #[test]
    fn balanced_split_table_scale() {
        let ds = balanced(130_000);
        let split = split_dataset(&ds, SplitSizes::new(200_000, 30_000, 30_000), true, 7).unwrap();
        for (part, n) in [
            (&split.train, 200_000),
            (&split.validation, 30_000),
            (&split.test, 30_000),
        ] {
            assert_eq!(part.len(), n);
            let design = part.records.iter().filter(|r| r.label == Some(Label::Design)).count();
            assert_eq!(design, n / 2);
        }
        let mut ids = HashSet::new();
        for part in [&split.train, &split.validation, &split.test] {
            for r in &part.records {
                assert!(ids.insert(r.id.clone()));
            }
        }
        assert_eq!(ids.len(), 260_000);
    }

    #[test]
    fn whole_dataset_to_train() {
        let ds = balanced(10);
        let split = split_dataset(&ds, SplitSizes::new(20, 0, 0), false, 1).unwrap();
        assert!(split.validation.is_empty() && split.test.is_empty());
        let mut a: Vec<_> = split.train.records.iter().map(|r| r.id.clone()).collect();
        let mut b: Vec<_> = ds.records.iter().map(|r| r.id.clone()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = balanced(50);
        let a = split_dataset(&ds, SplitSizes::new(40, 20, 20), true, 99).unwrap();
        let b = split_dataset(&ds, SplitSizes::new(40, 20, 20), true, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn balanced_split_shortfall_names_class() {
        let mut ds = balanced(10);
        ds.records.retain(|r| r.label == Some(Label::General) || r.id == "r0");
        match split_dataset(&ds, SplitSizes::new(8, 0, 0), true, 1) {
            Err(CorpusError::InsufficientClass { class, shortfall }) => {
                assert_eq!(class, Label::Design);
                assert_eq!(shortfall, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stats_examples() {
        let empty = Dataset::new("e", "so", vec![]);
        let s = dataset_stats(&empty);
        assert_eq!(
            (s.total, s.design_count, s.mean_discussion_length, s.vocabulary_size),
            (0, 0, 0.0, 0)
        );

        let ds = Dataset::new(
            "t",
            "so",
            vec![
                Discussion::new("1", "a b", "so").with_label(Label::Design),
                Discussion::new("2", "a", "so"),
            ],
        );
        let s = dataset_stats(&ds);
        assert_eq!(s.total, 2);
        assert_eq!(s.design_count, 1);
        assert_eq!(s.mean_discussion_length, 1.5);
        assert_eq!(s.vocabulary_size, 2);
    }
}
