//! Command-line pipeline: convert, train-dcae, extract-features,
//! train-booster, evaluate, run-all.

mod commands;
mod config;
mod files;

pub use commands::{
    cmd_convert, cmd_evaluate, cmd_extract_features, cmd_run_all, cmd_train_booster,
    cmd_train_dcae, ensemble_path, features_path, model_path, row_name, FeatureSource,
};
pub use config::{BoosterParams, BoosterSections, DcaeSection, GbdtSection, Overrides, PipelineConfig};
pub use files::{
    format_feature_csv, format_report_csv, format_report_text, parse_feature_csv, FeatureRow,
    ReportRow,
};

use crate::boosting::{Algorithm, BoostError};
use crate::dcae::{DcaeError, FeatureMode};
use crate::signal_io::{CacheError, ClassTag};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Failure classes, one per process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    MissingInput(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Shape(String),
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::MissingInput(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Shape(_) => 4,
            CliError::Degenerate(_) => 5,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> CliError {
        let msg = format!("{}: {e}", path.display());
        match e.kind() {
            std::io::ErrorKind::NotFound => CliError::MissingInput(msg),
            _ => CliError::Failed(msg),
        }
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        let msg = e.to_string();
        match e {
            CacheError::MissingLabel(_) => CliError::MissingInput(msg),
            CacheError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                CliError::MissingInput(format!("cache not found: {io}"))
            }
            CacheError::Io(_) => CliError::Failed(msg),
            _ => CliError::Parse(msg),
        }
    }
}

impl From<DcaeError> for CliError {
    fn from(e: DcaeError) -> Self {
        let msg = e.to_string();
        match e {
            DcaeError::ShapeMismatch { .. } | DcaeError::LengthMismatch { .. } => CliError::Shape(msg),
            DcaeError::CorruptFile(_) | DcaeError::VersionMismatch { .. } | DcaeError::BadConfig(_) => {
                CliError::Parse(msg)
            }
            DcaeError::EmptyTrainingSet | DcaeError::NonFiniteLoss { .. } | DcaeError::EmptyBatch => {
                CliError::Degenerate(msg)
            }
            DcaeError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                CliError::MissingInput(format!("model file not found: {io}"))
            }
            _ => CliError::Failed(msg),
        }
    }
}

impl From<BoostError> for CliError {
    fn from(e: BoostError) -> Self {
        let msg = e.to_string();
        match e {
            BoostError::SingleClass
            | BoostError::ConstantFeatures
            | BoostError::NoBetterThanChance { .. }
            | BoostError::NonFiniteScore { .. }
            | BoostError::EmptyMatrix => CliError::Degenerate(msg),
            BoostError::WidthMismatch { .. }
            | BoostError::LabelMismatch { .. }
            | BoostError::RaggedRows { .. } => CliError::Shape(msg),
            BoostError::Format(_) | BoostError::BadParams(_) | BoostError::NonFiniteFeature { .. } => {
                CliError::Parse(msg)
            }
            BoostError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                CliError::MissingInput(format!("ensemble file not found: {io}"))
            }
            BoostError::Io(_) => CliError::Failed(msg),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "deepboost-af", version, about = "AF detection: autoencoder features + boosting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse records and labels into the dataset cache.
    Convert(CommonArgs),
    /// Train the autoencoder on the training split.
    TrainDcae(CommonArgs),
    /// Write bottleneck features for every cached record.
    ExtractFeatures(CommonArgs),
    /// Fit one boosting ensemble on the training split.
    TrainBooster(BoosterArgs),
    /// Score one ensemble on the test split.
    Evaluate(BoosterArgs),
    /// Every stage, then the six-row comparison report.
    RunAll(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Pipeline configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Replaces every seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub feature_mode: Option<FeatureMode>,
    /// Comma-separated class tags counted as positive, e.g. `A` or `A,O`.
    #[arg(long, value_delimiter = ',')]
    pub positive_class: Option<Vec<ClassTag>>,
}

#[derive(Debug, Args)]
pub struct BoosterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub algo: Algorithm,
    /// Train on autoencoder features or on the normalized signals.
    #[arg(long, value_enum, default_value_t = FeatureSource::Dcae)]
    pub input: FeatureSource,
}

impl CommonArgs {
    fn load(&self) -> Result<PipelineConfig, CliError> {
        PipelineConfig::load(
            &self.config,
            &Overrides {
                seed: self.seed,
                feature_mode: self.feature_mode,
                positive_class: self.positive_class.clone(),
            },
        )
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Convert(a) => cmd_convert(&a.load()?).map(drop),
        Command::TrainDcae(a) => cmd_train_dcae(&a.load()?).map(drop),
        Command::ExtractFeatures(a) => cmd_extract_features(&a.load()?),
        Command::TrainBooster(a) => cmd_train_booster(&a.common.load()?, a.algo, a.input).map(drop),
        Command::Evaluate(a) => cmd_evaluate(&a.common.load()?, a.algo, a.input).map(drop),
        Command::RunAll(a) => cmd_run_all(&a.load()?).map(drop),
    }
}
