//! `design-miner` command line: each subcommand reads one JSON config,
//! writes its artifacts under `--out` and a `report.json` describing the run.
//!
//! Exit codes: 0 ok, 1 internal failure, 2 usage, 3 invalid data,
//! 4 missing artifact. Failures print one JSON line on stderr.

mod commands;
mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use report::RunReport;

#[derive(Debug, Parser)]
#[command(
    name = "design-miner",
    version,
    about = "Mine design discussions from developer text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a dataset, label it from tags and optionally split it
    Ingest(Common),
    /// Run the text pipeline over a dataset
    Preprocess(Common),
    /// Train a subword skipgram embedding
    TrainEmbedding(Common),
    /// Inject similar words into datasets
    Augment(Common),
    /// Fit a protocol on a dataset and save the model
    Train(Common),
    /// Cross-validate a protocol, or train on one dataset and test on another
    Evaluate(Common),
    /// Train on each dataset and test on every dataset
    CrossEval(Common),
    /// Top-k n-gram overlap between the two classes
    Overlap(Common),
    /// AUC distribution over training-set sizes
    Sweep(Common),
    /// Bigram presence with naive Bayes and a decision tree, 10-fold
    ReplicateBrunet(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON experiment config
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed (default 42)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Omit timestamps and timings from outputs
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Internal,
    Usage,
    InvalidData,
    MissingArtifact,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Internal => 1,
            ErrorKind::Usage => 2,
            ErrorKind::InvalidData => 3,
            ErrorKind::MissingArtifact => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Internal => "internal",
            ErrorKind::Usage => "usage",
            ErrorKind::InvalidData => "invalid-data",
            ErrorKind::MissingArtifact => "missing-artifact",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    /// The single diagnostic line printed on failure.
    pub fn diagnostic(&self) -> String {
        serde_json::json!({
            "error": self.kind.as_str(),
            "exit": self.kind.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.message)
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn execute<I, T>(argv: I) -> Result<RunReport, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli =
        Cli::try_parse_from(argv).map_err(|e| CliError::new(ErrorKind::Usage, e.to_string().trim().to_string()))?;
    match cli.command {
        Command::Ingest(c) => commands::ingest(&c),
        Command::Preprocess(c) => commands::preprocess(&c),
        Command::TrainEmbedding(c) => commands::train_embedding(&c),
        Command::Augment(c) => commands::augment(&c),
        Command::Train(c) => commands::train(&c),
        Command::Evaluate(c) => commands::evaluate(&c),
        Command::CrossEval(c) => commands::cross_eval(&c),
        Command::Overlap(c) => commands::overlap(&c),
        Command::Sweep(c) => commands::sweep(&c),
        Command::ReplicateBrunet(c) => commands::replicate_brunet(&c),
    }
}

/// Runs and returns the process exit status. Help and version requests go
/// to stdout with status 0; errors print one JSON line on stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&argv) {
        use clap::error::ErrorKind as K;
        if matches!(
            e.kind(),
            K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand
        ) {
            let _ = e.print();
            return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand {
                2
            } else {
                0
            };
        }
    }
    match execute(argv) {
        Ok(report) => {
            println!("{}", report.summary_line());
            0
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.kind.exit_code()
        }
    }
}
