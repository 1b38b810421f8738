use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use design_miner::corpus::{
    dataset_stats, default_design_tags, label_dataset, load_dataset, split_dataset, Dataset, DatasetStats, Format,
    SplitSizes,
};
use design_miner::embedding::{train_embedding_with_report, EmbeddingConfig};
use design_miner::features::Scheme;
use design_miner::learn::{kfold, stratified_kfold, ClassifierKind, ClassifierSpec};
use design_miner::metrics::{self as dm_metrics, chunk_sweep, cross_validate, overlap_analysis, MetricsReport};
use design_miner::protocol::{
    AugmentationMode, Balancing, ExperimentProtocol, FittedVectorizer, PipelineSettings, PreparedProtocol,
    ProtocolError, VectorizerKind,
};
use design_miner::textproc::TokenSeq;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::report::{Outputs, RunContext};
use crate::{CliError, Common, ErrorKind, RunReport};

const DEFAULT_SEED: u64 = 42;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::new(ErrorKind::Usage, msg)
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::new(ErrorKind::InvalidData, msg)
}

fn missing(path: &Path) -> CliError {
    CliError::new(
        ErrorKind::MissingArtifact,
        format!("missing artifact {}", path.display()),
    )
}

fn protocol_error(e: ProtocolError) -> CliError {
    use design_miner::learn::LearnError;
    match &e {
        ProtocolError::MissingArtifact(p) => missing(p),
        ProtocolError::InvalidProtocol(_)
        | ProtocolError::Augment(_)
        | ProtocolError::Learn(LearnError::InvalidSpec(_) | LearnError::InvalidFolds(_)) => usage(e.to_string()),
        _ => invalid(e.to_string()),
    }
}

fn context(name: &'static str, common: &Common) -> RunContext {
    RunContext {
        subcommand: name,
        config_file: common.config.clone(),
        out: common.out.clone(),
        deterministic: common.deterministic,
        started: Instant::now(),
    }
}

/// Keys present in `input` but absent from `resolved`, as dotted paths.
fn unknown_keys(input: &Value, resolved: &Value, prefix: &str, out: &mut Vec<String>) {
    if let (Value::Object(a), Value::Object(b)) = (input, resolved) {
        for (k, v) in a {
            let path = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            match b.get(k) {
                None => out.push(path),
                Some(r) => unknown_keys(v, r, &path, out),
            }
        }
    }
}

/// Reads a config, rejecting keys that no field consumes. Returns the
/// config and the directory relative paths resolve against.
fn load_config<T: DeserializeOwned + Serialize>(path: &Path) -> Result<(T, PathBuf), CliError> {
    if !path.is_file() {
        return Err(missing(path));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::new(ErrorKind::Internal, e.to_string()))?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if !raw.is_object() {
        return Err(usage(format!("{}: config must be a JSON object", path.display())));
    }
    let cfg: T = serde_json::from_value(raw.clone()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut unknown = Vec::new();
    unknown_keys(
        &raw,
        &serde_json::to_value(&cfg).expect("config serialises"),
        "",
        &mut unknown,
    );
    if !unknown.is_empty() {
        return Err(usage(format!(
            "{}: unknown config keys {}",
            path.display(),
            unknown.join(", ")
        )));
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let base = if base.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        base
    };
    let base = base.canonicalize().unwrap_or(base);
    Ok((cfg, base))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}

fn resolve_protocol(p: &mut ExperimentProtocol, base: &Path) {
    if !matches!(p.pipeline.stopwords.as_str(), "default" | "none") {
        p.pipeline.stopwords = resolve(base, Path::new(&p.pipeline.stopwords)).display().to_string();
    }
    resolve_pipeline(&mut p.pipeline, base);
    if let Some(e) = &mut p.vectorizer.embedding {
        *e = resolve(base, e);
    }
    for v in p.augmentation.injectors.values_mut() {
        *v = resolve(base, v);
    }
}

fn resolve_pipeline(p: &mut PipelineSettings, base: &Path) {
    if let Some(l) = &mut p.lemma_file {
        *l = resolve(base, l);
    }
}

fn prepare(p: &mut ExperimentProtocol, base: &Path, seed: Option<u64>) -> Result<PreparedProtocol, CliError> {
    resolve_protocol(p, base);
    if let Some(s) = seed {
        p.seed = s;
    }
    p.prepare(None).map_err(protocol_error)
}

fn pipeline_only(settings: &PipelineSettings, base: &Path) -> Result<(PipelineSettings, PreparedProtocol), CliError> {
    let mut p = ExperimentProtocol {
        pipeline: settings.clone(),
        ..Default::default()
    };
    let prepared = prepare(&mut p, base, None)?;
    Ok((p.pipeline, prepared))
}

fn load(path: &Path, format: Option<Format>) -> Result<Dataset, CliError> {
    if !path.is_file() {
        return Err(missing(path));
    }
    load_dataset(path, format.unwrap_or_else(|| Format::from_path(path)))
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn stats_of(datasets: &[&Dataset]) -> BTreeMap<String, DatasetStats> {
    datasets.iter().map(|d| (d.name.clone(), dataset_stats(d))).collect()
}

fn stage_dataset(outputs: &mut Outputs, name: &str, ds: Dataset) {
    outputs.custom(name, move |p| {
        ds.write_jsonl(p)
            .map_err(|e| CliError::new(ErrorKind::Internal, e.to_string()))
    });
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

const METRICS_HEADER: &str = "run,accuracy,balanced_accuracy,precision,recall,specificity,f1,mcc,auc,tp,fp,tn,fn\n";

fn metrics_row(out: &mut String, run: &str, m: &MetricsReport) {
    let c = &m.confusion;
    let _ = writeln!(
        out,
        "{run},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{}",
        m.accuracy,
        m.balanced_accuracy,
        m.precision,
        m.recall,
        m.specificity,
        m.f1,
        m.mcc,
        opt(m.auc),
        c.tp,
        c.fp,
        c.tn,
        c.fn_
    );
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serialises")
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct SplitSettings {
    train: usize,
    validation: usize,
    test: usize,
    balance: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct IngestConfig {
    input: PathBuf,
    format: Option<Format>,
    /// Tags marking a record as design; the built-in list when absent.
    design_tags: Option<Vec<String>>,
    overwrite_labels: bool,
    split: Option<SplitSettings>,
    seed: u64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            format: None,
            design_tags: None,
            overwrite_labels: false,
            split: None,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn ingest(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("ingest", common);
    let (mut cfg, base): (IngestConfig, _) = load_config(&common.config)?;
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    cfg.input = resolve(&base, &cfg.input);
    cfg.format = Some(cfg.format.unwrap_or_else(|| Format::from_path(&cfg.input)));
    let tags: HashSet<String> = match &cfg.design_tags {
        Some(t) => t.iter().map(|s| s.to_lowercase()).collect(),
        None => default_design_tags(),
    };
    let mut sorted: Vec<String> = tags.iter().cloned().collect();
    sorted.sort();
    cfg.design_tags = Some(sorted);

    let mut ds = load(&cfg.input, cfg.format)?;
    label_dataset(&mut ds, &tags, cfg.overwrite_labels);
    let mut outputs = Outputs::new();
    let mut csv = String::from("dataset,total,design,mean_length,vocabulary\n");
    let mut stats = BTreeMap::new();
    let mut row = |d: &Dataset, csv: &mut String| {
        let s = dataset_stats(d);
        let _ = writeln!(
            csv,
            "{},{},{},{:.6},{}",
            d.name, s.total, s.design_count, s.mean_discussion_length, s.vocabulary_size
        );
        stats.insert(d.name.clone(), s);
    };
    row(&ds, &mut csv);
    let mut results = json!({ "records": ds.len() });
    if let Some(split) = &cfg.split {
        let sizes = SplitSizes::new(split.train, split.validation, split.test);
        let parts = split_dataset(&ds, sizes, split.balance, cfg.seed).map_err(|e| invalid(e.to_string()))?;
        for part in [&parts.train, &parts.validation, &parts.test] {
            row(part, &mut csv);
        }
        results["split"] = to_value(&sizes);
        stage_dataset(&mut outputs, "train.jsonl", parts.train);
        stage_dataset(&mut outputs, "validation.jsonl", parts.validation);
        stage_dataset(&mut outputs, "test.jsonl", parts.test);
    }
    let name = format!("{}.labeled.jsonl", ds.name);
    stage_dataset(&mut outputs, &name, ds);
    outputs.text("metrics.csv", csv);
    ctx.finish(cfg.seed, to_value(&cfg), stats, results, Vec::new(), outputs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct PreprocessConfig {
    input: PathBuf,
    pipeline: PipelineSettings,
    seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            pipeline: PipelineSettings::default(),
            seed: DEFAULT_SEED,
        }
    }
}

pub fn preprocess(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("preprocess", common);
    let (mut cfg, base): (PreprocessConfig, _) = load_config(&common.config)?;
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    cfg.input = resolve(&base, &cfg.input);
    let (pipeline, prepared) = pipeline_only(&cfg.pipeline, &base)?;
    cfg.pipeline = pipeline;
    let ds = load(&cfg.input, None)?;
    let out = prepared.pipelined(&ds);
    let tokens: usize = out.records.iter().map(|r| TokenSeq::from_text(&r.text).len()).sum();
    let empty = out.records.iter().filter(|r| r.text.is_empty()).count();
    let mut csv = String::from("dataset,records,tokens,mean_tokens,empty_records\n");
    let _ = writeln!(
        csv,
        "{},{},{},{:.6},{}",
        ds.name,
        out.len(),
        tokens,
        if out.is_empty() {
            0.0
        } else {
            tokens as f64 / out.len() as f64
        },
        empty
    );
    let stats = stats_of(&[&ds]);
    let results = json!({ "records": out.len(), "tokens": tokens, "empty_records": empty });
    let mut outputs = Outputs::new();
    stage_dataset(&mut outputs, &format!("{}.preprocessed.jsonl", ds.name), out);
    outputs.text("metrics.csv", csv);
    ctx.finish(cfg.seed, to_value(&cfg), stats, results, Vec::new(), outputs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct TrainEmbeddingConfig {
    /// Datasets (`.jsonl`/`.csv`) or plain text files with one document per line.
    inputs: Vec<PathBuf>,
    pipeline: PipelineSettings,
    embedding: EmbeddingConfig,
    track_loss: bool,
    output_name: String,
}

impl Default for TrainEmbeddingConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            pipeline: PipelineSettings::default(),
            embedding: EmbeddingConfig::default(),
            track_loss: false,
            output_name: "embedding.vec".into(),
        }
    }
}

pub fn train_embedding(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("train-embedding", common);
    let (mut cfg, base): (TrainEmbeddingConfig, _) = load_config(&common.config)?;
    if let Some(s) = common.seed {
        cfg.embedding.seed = s;
    }
    if cfg.inputs.is_empty() {
        return Err(usage("train-embedding needs at least one input"));
    }
    if cfg.output_name.contains(['/', '\\']) || cfg.output_name.is_empty() {
        return Err(usage("output_name must be a plain file name"));
    }
    cfg.inputs = cfg.inputs.iter().map(|p| resolve(&base, p)).collect();
    let (pipeline, prepared) = pipeline_only(&cfg.pipeline, &base)?;
    cfg.pipeline = pipeline;
    let mut corpus = Vec::new();
    let mut stats = BTreeMap::new();
    for path in &cfg.inputs {
        if !path.is_file() {
            return Err(missing(path));
        }
        if path.extension().is_some_and(|e| e == "txt") {
            let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            corpus.extend(text.lines().map(|l| prepared.pipeline.run(l)).filter(|t| !t.is_empty()));
        } else {
            let ds = load(path, None)?;
            corpus.extend(
                ds.records
                    .iter()
                    .map(|r| prepared.pipeline.run(&r.text))
                    .filter(|t| !t.is_empty()),
            );
            stats.insert(ds.name.clone(), dataset_stats(&ds));
        }
    }
    let (model, report) =
        train_embedding_with_report(&corpus, &cfg.embedding, cfg.track_loss).map_err(|e| invalid(e.to_string()))?;
    let results = json!({
        "sentences": corpus.len(),
        "vocab_size": report.vocab_size,
        "training_tokens": report.training_tokens,
        "dim": model.dim(),
        "fingerprint": model.fingerprint(),
        "epoch_losses": report.epoch_losses,
    });
    let mut csv = String::from("epoch,loss\n");
    for (i, l) in report.epoch_losses.iter().enumerate() {
        let _ = writeln!(csv, "{},{l:.6}", i + 1);
    }
    let seed = cfg.embedding.seed;
    let mut outputs = Outputs::new();
    outputs.custom(&cfg.output_name.clone(), move |p| {
        model
            .save(p)
            .map_err(|e| CliError::new(ErrorKind::Internal, e.to_string()))
    });
    outputs.text("metrics.csv", csv);
    ctx.finish(seed, to_value(&cfg), stats, results, Vec::new(), outputs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct AugmentCommandConfig {
    train: PathBuf,
    test: Option<PathBuf>,
    #[serde(flatten)]
    protocol: ExperimentProtocol,
}

impl Default for AugmentCommandConfig {
    fn default() -> Self {
        Self {
            train: PathBuf::new(),
            test: None,
            protocol: ExperimentProtocol::default(),
        }
    }
}

pub fn augment(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("augment", common);
    let (mut cfg, base): (AugmentCommandConfig, _) = load_config(&common.config)?;
    cfg.train = resolve(&base, &cfg.train);
    cfg.test = cfg.test.as_ref().map(|p| resolve(&base, p));
    if cfg.protocol.augmentation.mode == AugmentationMode::None {
        return Err(usage("augment needs augmentation.mode total-domain or cross-domain"));
    }
    if cfg.protocol.augmentation.mode == AugmentationMode::CrossDomain && cfg.test.is_none() {
        return Err(usage("cross-domain augmentation needs a test dataset"));
    }
    let prepared = prepare(&mut cfg.protocol, &base, common.seed)?;
    let train = load(&cfg.train, None)?;
    let test = match &cfg.test {
        Some(p) => load(p, None)?,
        None => Dataset::new(format!("{}-none", train.name), train.domain.clone(), Vec::new()),
    };
    let stats = if cfg.test.is_some() {
        stats_of(&[&train, &test])
    } else {
        stats_of(&[&train])
    };
    let (train_aug, test_aug, warnings) = prepared.prepare_pair(&train, &test).map_err(protocol_error)?;
    let mut csv = String::from("dataset,records,tokens_before,tokens_after\n");
    let count = |d: &Dataset| {
        d.records
            .iter()
            .map(|r| TokenSeq::from_text(&r.text).len())
            .sum::<usize>()
    };
    let mut results = serde_json::Map::new();
    let mut outputs = Outputs::new();
    let mut sides = vec![(prepared.pipelined(&train), train_aug)];
    if cfg.test.is_some() {
        sides.push((prepared.pipelined(&test), test_aug));
    }
    for (before, after) in sides {
        let (b, a) = (count(&before), count(&after));
        let _ = writeln!(csv, "{},{},{b},{a}", after.name, after.len());
        results.insert(
            after.name.clone(),
            json!({ "records": after.len(), "tokens_before": b, "tokens_after": a }),
        );
        stage_dataset(&mut outputs, &format!("{}.augmented.jsonl", after.name), after);
    }
    outputs.text("metrics.csv", csv);
    let seed = cfg.protocol.seed;
    ctx.finish(seed, to_value(&cfg), stats, Value::Object(results), warnings, outputs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct TrainConfig {
    train: PathBuf,
    /// Domain the model will be applied to; needed by cross-domain augmentation.
    target_domain: Option<String>,
    #[serde(flatten)]
    protocol: ExperimentProtocol,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            train: PathBuf::new(),
            target_domain: None,
            protocol: ExperimentProtocol::default(),
        }
    }
}

pub fn train(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("train", common);
    let (mut cfg, base): (TrainConfig, _) = load_config(&common.config)?;
    cfg.train = resolve(&base, &cfg.train);
    let prepared = prepare(&mut cfg.protocol, &base, common.seed)?;
    let ds = load(&cfg.train, None)?;
    if ds.classes().len() < 2 {
        return Err(invalid(format!("dataset {} lacks one of the classes", ds.name)));
    }
    if cfg.protocol.augmentation.mode == AugmentationMode::CrossDomain && cfg.target_domain.is_none() {
        return Err(usage("cross-domain augmentation needs target_domain"));
    }
    let target = cfg.target_domain.clone().unwrap_or_else(|| ds.domain.clone());
    cfg.target_domain = Some(target.clone());
    let seed = cfg.protocol.seed;
    let empty = Dataset::new("target", target, Vec::new());
    let (train_p, _, mut warnings) = prepared.prepare_pair(&ds, &empty).map_err(protocol_error)?;
    let fitted = prepared.fit_prepared(&train_p, seed).map_err(protocol_error)?;
    warnings.extend(fitted.warnings.iter().cloned());
    let scores = prepared.score_prepared(&fitted, &train_p).map_err(protocol_error)?;
    let y = ds.design_flags().map_err(|e| invalid(e.to_string()))?;
    let t = fitted.model.decision_threshold();
    let pred: Vec<bool> = scores.iter().map(|&s| s >= t).collect();
    let mut m =
        dm_metrics::classification_metrics(&dm_metrics::confusion(&y, &pred).map_err(|e| invalid(e.to_string()))?)
            .map_err(|e| invalid(e.to_string()))?;
    m.auc = dm_metrics::auc(&scores, &y).ok();
    let mut csv = String::from(METRICS_HEADER);
    metrics_row(&mut csv, "training", &m);
    let results = json!({
        "protocol": cfg.protocol.describe(),
        "vectorizer": fitted.vectorizer.identity(),
        "decision_threshold": t,
        "training_metrics": m,
    });
    let mut outputs = Outputs::new();
    let model = fitted.model.clone();
    outputs.custom("model.json", move |p| {
        model
            .save(p)
            .map_err(|e| CliError::new(ErrorKind::Internal, e.to_string()))
    });
    if let FittedVectorizer::Ngrams { vocab, kind } = &fitted.vectorizer {
        let scheme = if *kind == VectorizerKind::Tfidf {
            Scheme::Tfidf
        } else {
            Scheme::Count
        };
        let vocab = vocab.clone();
        outputs.custom("vocabulary.tsv", move |p| {
            vocab
                .save(p, scheme)
                .map_err(|e| CliError::new(ErrorKind::Internal, e.to_string()))
        });
    }
    outputs.text("metrics.csv", csv);
    ctx.finish(seed, to_value(&cfg), stats_of(&[&ds]), results, warnings, outputs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct EvaluateConfig {
    dataset: PathBuf,
    /// When present, train on `dataset` and test here instead of cross-validating.
    test: Option<PathBuf>,
    folds: usize,
    stratified: bool,
    #[serde(flatten)]
    protocol: ExperimentProtocol,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            test: None,
            folds: 10,
            stratified: true,
            protocol: ExperimentProtocol::default(),
        }
    }
}

fn cv_csv(cv: &dm_metrics::CrossValidation, label: &str) -> String {
    let mut csv = String::new();
    for f in &cv.folds {
        metrics_row(&mut csv, &format!("{label}fold-{}", f.fold), &f.metrics);
    }
    let _ = writeln!(
        csv,
        "{label}mean,{:.6},{:.6},,,,,,{},,,,",
        cv.mean_accuracy,
        cv.mean_balanced_accuracy,
        opt(cv.mean_auc)
    );
    csv
}

fn folds_for(
    ds: &Dataset,
    k: usize,
    stratified: bool,
    seed: u64,
) -> Result<design_miner::learn::FoldAssignment, CliError> {
    let y = ds.design_flags().map_err(|e| invalid(e.to_string()))?;
    let r = if stratified {
        stratified_kfold(&y, k, seed, false)
    } else {
        kfold(y.len(), k, seed)
    };
    r.map_err(|e| invalid(e.to_string()))
}

pub fn evaluate(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("evaluate", common);
    let (mut cfg, base): (EvaluateConfig, _) = load_config(&common.config)?;
    cfg.dataset = resolve(&base, &cfg.dataset);
    cfg.test = cfg.test.as_ref().map(|p| resolve(&base, p));
    let prepared = prepare(&mut cfg.protocol, &base, common.seed)?;
    let seed = cfg.protocol.seed;
    let ds = load(&cfg.dataset, None)?;
    if ds.classes().len() < 2 {
        return Err(invalid(format!("dataset {} lacks one of the classes", ds.name)));
    }
    let mut csv = String::from(METRICS_HEADER);
    let (results, stats, warnings) = match &cfg.test {
        Some(p) => {
            let test = load(p, None)?;
            let ev = prepared.evaluate(&ds, &test, seed).map_err(protocol_error)?;
            metrics_row(&mut csv, &format!("{}->{}", ds.name, test.name), &ev.metrics);
            let w = ev.warnings.clone();
            (
                json!({ "protocol": cfg.protocol.describe(), "evaluation": ev }),
                stats_of(&[&ds, &test]),
                w,
            )
        }
        None => {
            if cfg.folds < 2 {
                return Err(usage("folds must be at least 2"));
            }
            let folds = folds_for(&ds, cfg.folds, cfg.stratified, seed)?;
            let cv = cross_validate(&ds, &folds, &prepared).map_err(protocol_error)?;
            csv.push_str(&cv_csv(&cv, ""));
            (
                json!({ "protocol": cfg.protocol.describe(), "cross_validation": cv }),
                stats_of(&[&ds]),
                Vec::new(),
            )
        }
    };
    let mut outputs = Outputs::new();
    outputs.text("metrics.csv", csv);
    ctx.finish(seed, to_value(&cfg), stats, results, warnings, outputs)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct CrossEvalConfig {
    datasets: Vec<PathBuf>,
    #[serde(flatten)]
    protocol: ExperimentProtocol,
}

pub fn cross_eval(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("cross-eval", common);
    let (mut cfg, base): (CrossEvalConfig, _) = load_config(&common.config)?;
    if cfg.datasets.is_empty() {
        return Err(usage("cross-eval needs at least one dataset"));
    }
    cfg.datasets = cfg.datasets.iter().map(|p| resolve(&base, p)).collect();
    let prepared = prepare(&mut cfg.protocol, &base, common.seed)?;
    let datasets: Vec<Dataset> = cfg.datasets.iter().map(|p| load(p, None)).collect::<Result<_, _>>()?;
    let mut names = HashSet::new();
    for d in &datasets {
        if !names.insert(d.name.clone()) {
            return Err(usage(format!("dataset name {:?} appears twice", d.name)));
        }
    }
    let matrix = dm_metrics::cross_eval(&datasets, &prepared).map_err(protocol_error)?;
    let mut csv = String::from("train,test,auc,held_out,n_train,n_test\n");
    let mut warnings = Vec::new();
    for (row, vals) in matrix.cells.iter().zip(&matrix.values) {
        for (c, v) in row.iter().zip(vals) {
            let _ = writeln!(
                csv,
                "{},{},{v:.6},{},{},{}",
                c.train, c.test, c.held_out, c.n_train, c.n_test
            );
            warnings.extend(c.warnings.iter().map(|w| format!("{}->{}: {w}", c.train, c.test)));
        }
    }
    let generated = (!common.deterministic).then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| format!("unix {}", d.as_secs()))
            .unwrap_or_default()
    });
    let svg = matrix.to_svg(generated.as_deref());
    let mut outputs = Outputs::new();
    outputs.text("matrix.csv", matrix.to_csv());
    outputs.text("matrix.svg", svg);
    outputs.text("metrics.csv", csv);
    let refs: Vec<&Dataset> = datasets.iter().collect();
    let results = json!({ "protocol": cfg.protocol.describe(), "matrix": matrix });
    let seed = cfg.protocol.seed;
    ctx.finish(seed, to_value(&cfg), stats_of(&refs), results, warnings, outputs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct OverlapConfig {
    dataset: PathBuf,
    ngram_sizes: Vec<usize>,
    top_k: usize,
    pipeline: PipelineSettings,
    seed: u64,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            ngram_sizes: vec![1, 2, 3],
            top_k: 100,
            pipeline: PipelineSettings::default(),
            seed: DEFAULT_SEED,
        }
    }
}

pub fn overlap(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("overlap", common);
    let (mut cfg, base): (OverlapConfig, _) = load_config(&common.config)?;
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    cfg.dataset = resolve(&base, &cfg.dataset);
    if cfg.ngram_sizes.is_empty() || cfg.ngram_sizes.contains(&0) || cfg.top_k == 0 {
        return Err(usage("ngram_sizes must be positive and top_k at least 1"));
    }
    let (pipeline, prepared) = pipeline_only(&cfg.pipeline, &base)?;
    cfg.pipeline = pipeline;
    let ds = load(&cfg.dataset, None)?;
    let flags = ds.design_flags().map_err(|e| invalid(e.to_string()))?;
    let (mut design, mut general) = (Vec::new(), Vec::new());
    for (r, d) in ds.records.iter().zip(&flags) {
        let t = prepared.pipeline.run(&r.text);
        if *d {
            design.push(t)
        } else {
            general.push(t)
        }
    }
    if design.is_empty() || general.is_empty() {
        return Err(invalid(format!("dataset {} lacks one of the classes", ds.name)));
    }
    let mut csv = String::from("ngram,top_k,overlap_pct,shared\n");
    let mut reports = Vec::new();
    for &n in &cfg.ngram_sizes {
        let r = overlap_analysis(&design, &general, n, cfg.top_k).map_err(|e| invalid(e.to_string()))?;
        let _ = writeln!(csv, "{n},{},{:.6},{}", r.top_k, r.overlap_pct, r.shared.len());
        reports.push(r);
    }
    let mut outputs = Outputs::new();
    outputs.text("metrics.csv", csv);
    ctx.finish(
        cfg.seed,
        to_value(&cfg),
        stats_of(&[&ds]),
        json!({ "overlap": reports }),
        Vec::new(),
        outputs,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct SweepConfig {
    train: PathBuf,
    test: PathBuf,
    chunk_sizes: Vec<usize>,
    repeats: usize,
    /// Classifier suite; the protocol's classifier alone when empty.
    classifiers: Vec<ClassifierSpec>,
    #[serde(flatten)]
    protocol: ExperimentProtocol,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            train: PathBuf::new(),
            test: PathBuf::new(),
            chunk_sizes: Vec::new(),
            repeats: 5,
            classifiers: Vec::new(),
            protocol: ExperimentProtocol::default(),
        }
    }
}

pub fn sweep(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("sweep", common);
    let (mut cfg, base): (SweepConfig, _) = load_config(&common.config)?;
    cfg.train = resolve(&base, &cfg.train);
    cfg.test = resolve(&base, &cfg.test);
    if cfg.chunk_sizes.is_empty() || cfg.chunk_sizes.contains(&0) {
        return Err(usage("sweep needs positive chunk_sizes"));
    }
    let prepared = prepare(&mut cfg.protocol, &base, common.seed)?;
    if cfg.classifiers.is_empty() {
        cfg.classifiers = vec![cfg.protocol.classifier.clone()];
    }
    for c in &cfg.classifiers {
        c.validate().map_err(|e| usage(e.to_string()))?;
    }
    let seed = cfg.protocol.seed;
    let train = load(&cfg.train, None)?;
    let test = load(&cfg.test, None)?;
    let chunks = chunk_sweep(
        &train,
        &test,
        &cfg.chunk_sizes,
        &prepared,
        &cfg.classifiers,
        cfg.repeats,
        seed,
    )
    .map_err(protocol_error)?;
    let mut csv = String::from("size,runs,median_auc,min_auc,max_auc\n");
    for c in &chunks {
        let _ = writeln!(
            csv,
            "{},{},{:.6},{:.6},{:.6}",
            c.size,
            c.aucs.len(),
            c.median,
            c.min,
            c.max
        );
    }
    let mut outputs = Outputs::new();
    outputs.text("metrics.csv", csv);
    let results = json!({ "protocol": cfg.protocol.describe(), "chunks": chunks });
    ctx.finish(
        seed,
        to_value(&cfg),
        stats_of(&[&train, &test]),
        results,
        Vec::new(),
        outputs,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct BrunetConfig {
    dataset: PathBuf,
    folds: usize,
    pipeline: PipelineSettings,
    classifiers: Vec<ClassifierSpec>,
    seed: u64,
}

impl Default for BrunetConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            folds: 10,
            pipeline: PipelineSettings {
                lemmatize: false,
                ..PipelineSettings::default()
            },
            classifiers: vec![
                ClassifierSpec::new(ClassifierKind::MultinomialNb),
                ClassifierSpec::new(ClassifierKind::DecisionTree),
            ],
            seed: DEFAULT_SEED,
        }
    }
}

/// The fixed protocol for one classifier of the preset.
pub fn brunet_protocol(pipeline: PipelineSettings, classifier: ClassifierSpec, seed: u64) -> ExperimentProtocol {
    let mut p = ExperimentProtocol {
        pipeline,
        classifier,
        balancing: Balancing::None,
        seed,
        ..Default::default()
    };
    p.vectorizer.kind = VectorizerKind::BigramTop200;
    p.vectorizer.ngram_range = (2, 2);
    p.vectorizer.standardize = false;
    p
}

pub fn replicate_brunet(common: &Common) -> Result<RunReport, CliError> {
    let ctx = context("replicate-brunet", common);
    let (mut cfg, base): (BrunetConfig, _) = load_config(&common.config)?;
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    cfg.dataset = resolve(&base, &cfg.dataset);
    if cfg.folds < 2 {
        return Err(usage("folds must be at least 2"));
    }
    if cfg.classifiers.is_empty() {
        return Err(usage("replicate-brunet needs at least one classifier"));
    }
    let (pipeline, _) = pipeline_only(&cfg.pipeline, &base)?;
    cfg.pipeline = pipeline;
    let ds = load(&cfg.dataset, None)?;
    if ds.classes().len() < 2 {
        return Err(invalid(format!("dataset {} lacks one of the classes", ds.name)));
    }
    let folds = folds_for(&ds, cfg.folds, false, cfg.seed)?;
    let mut csv = String::from(METRICS_HEADER);
    let mut results = serde_json::Map::new();
    let mut protocols = Vec::new();
    for spec in &cfg.classifiers {
        let mut protocol = brunet_protocol(cfg.pipeline.clone(), spec.clone(), cfg.seed);
        let prepared = prepare(&mut protocol, &base, None)?;
        let cv = cross_validate(&ds, &folds, &prepared).map_err(protocol_error)?;
        csv.push_str(&cv_csv(&cv, &format!("{}:", spec.kind)));
        results.insert(
            spec.kind.to_string(),
            json!({
                "mean_accuracy": cv.mean_accuracy,
                "mean_auc": cv.mean_auc,
                "cross_validation": cv,
            }),
        );
        protocols.push(protocol);
    }
    results.insert("protocols".into(), to_value(&protocols));
    let mut outputs = Outputs::new();
    outputs.text("metrics.csv", csv);
    ctx.finish(
        cfg.seed,
        to_value(&cfg),
        stats_of(&[&ds]),
        Value::Object(results),
        Vec::new(),
        outputs,
    )
}
