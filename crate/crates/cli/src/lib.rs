//! Command-line runner: synthetic data, seeded cross-validation, fit and
//! predict, report and plot rendering.
//!
//! Exit codes are a stable contract: 0 success, 2 configuration error,
//! 3 data error, 4 model error.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_cv, cmd_fit, cmd_plot, cmd_predict, cmd_report, cmd_synth, ModelBundle, ReportFormat, SynthArgs};
pub use config::{load_config, LoadedConfig, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("model error: {0}")]
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Model(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fatigue-uq", version, about = "Fatigue-life prediction with uncertainty intervals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic Basquin dataset and its schema.
    Synth(SynthArgs),
    /// Cross-validate every configured model and write the report files.
    Cv {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `threads` in the config.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Train every configured model on the full dataset and save it.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Predict a holdout table with a model saved by `fit`.
    Predict {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        holdout: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Required when the config lists more than one model.
        #[arg(long)]
        model: Option<String>,
    },
    /// Print a saved report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
    /// Plot held-out predictions written by `cv`.
    Plot {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        model: String,
        /// Restrict to one fold; all folds when absent.
        #[arg(long)]
        fold: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Run one command, returning what it would print on standard output.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Synth(args) => cmd_synth(&args),
        Command::Cv { config, threads } => cmd_cv(&config, threads),
        Command::Fit { config, threads } => cmd_fit(&config, threads),
        Command::Predict { config, holdout, out, model } => cmd_predict(&config, &holdout, &out, model.as_deref()),
        Command::Report { input, format } => cmd_report(&input, format),
        Command::Plot { predictions, model, fold, out } => cmd_plot(&predictions, &model, fold, &out),
    }
}
