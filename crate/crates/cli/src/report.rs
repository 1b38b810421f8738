use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use design_miner::corpus::DatasetStats;
use serde::Serialize;
use serde_json::Value;

use crate::{CliError, ErrorKind};

/// Everything a run resolved and produced. Written as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_file: String,
    pub seed: u64,
    pub positive_class: String,
    /// The config with every default filled in and flag overrides applied.
    pub resolved_config: Value,
    pub dataset_stats: BTreeMap<String, DatasetStats>,
    pub results: Value,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn summary_line(&self) -> String {
        format!(
            "{} ok: {} files in {}",
            self.subcommand,
            self.outputs.len(),
            self.out_dir.display()
        )
    }
}

type Writer = Box<dyn FnOnce(&Path) -> Result<(), CliError>>;

/// Files staged during a run and written together once it succeeds.
pub struct Outputs {
    files: Vec<(String, Writer)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self { files: Vec::new() }
    }

    pub fn text(&mut self, name: &str, content: String) {
        self.files.push((
            name.to_string(),
            Box::new(move |p: &Path| {
                fs::write(p, content).map_err(|e| CliError::new(ErrorKind::Internal, format!("{}: {e}", p.display())))
            }),
        ));
    }

    pub fn custom<F>(&mut self, name: &str, f: F)
    where
        F: FnOnce(&Path) -> Result<(), CliError> + 'static,
    {
        self.files.push((name.to_string(), Box::new(f)));
    }

    fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }
}

pub struct RunContext {
    pub subcommand: &'static str,
    pub config_file: PathBuf,
    pub out: PathBuf,
    pub deterministic: bool,
    pub started: Instant,
}

impl RunContext {
    /// Writes staged files plus `report.json` and returns the report.
    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        self,
        seed: u64,
        resolved_config: Value,
        dataset_stats: BTreeMap<String, DatasetStats>,
        results: Value,
        warnings: Vec<String>,
        mut outputs: Outputs,
    ) -> Result<RunReport, CliError> {
        let mut names = outputs.names();
        names.push("report.json".into());
        let report = RunReport {
            tool: "design-miner".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: self.subcommand.into(),
            config_file: self.config_file.display().to_string(),
            seed,
            positive_class: design_miner::metrics::POSITIVE_CLASS.into(),
            resolved_config,
            dataset_stats,
            results,
            warnings,
            outputs: names,
            wall_clock_seconds: (!self.deterministic).then(|| self.started.elapsed().as_secs_f64()),
            generated_unix: (!self.deterministic).then(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            }),
            out_dir: self.out.clone(),
        };
        fs::create_dir_all(&self.out)
            .map_err(|e| CliError::new(ErrorKind::Internal, format!("{}: {e}", self.out.display())))?;
        for (name, write) in outputs.files.drain(..) {
            write(&self.out.join(name))?;
        }
        let json = serde_json::to_string_pretty(&report).expect("report serialises");
        fs::write(self.out.join("report.json"), json + "\n")
            .map_err(|e| CliError::new(ErrorKind::Internal, e.to_string()))?;
        Ok(report)
    }
}
