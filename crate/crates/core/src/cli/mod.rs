//! Command-line front end. [`run`] parses arguments, executes one verb and
//! returns the process exit code: 0 success, 2 usage or parameter error,
//! 3 I/O error, 4 artifact mismatch.

mod commands;
pub mod config;
pub mod manifest;
pub mod repro;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::stimuli::StimulusClass;

pub use config::Config;
pub use manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Mismatch(_) => EXIT_MISMATCH,
        Error::InMetric { source, .. } | Error::Stimulus { source, .. } => exit_code(source),
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "soundq", version, about = "Psychoacoustic sound-quality metrics, NVH stimuli and seeded ML baselines")]
pub struct Cli {
    /// TOML file overriding default parameters; flags override it in turn.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize one stimulus to a WAV file with a JSON spec sidecar.
    Synth(SynthArgs),
    /// Compute every metric of a WAV file (`-` reads stdin).
    Analyze(AnalyzeArgs),
    /// Build the labeled feature dataset with its frozen split.
    Dataset(DatasetArgs),
    /// Train a classifier on a dataset's train split.
    Train(TrainArgs),
    /// Evaluate a trained model on its dataset's test split.
    Eval(EvalArgs),
    /// Project a dataset onto its principal components.
    Pca(PcaArgs),
    /// Regenerate every figure and table data file into a directory.
    Repro(ReproArgs),
}

fn parse_class(s: &str) -> Result<StimulusClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// engine-boom, wind-whistle or road-noise.
    #[arg(value_parser = parse_class)]
    pub class: StimulusClass,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Item index within the seeded family.
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    #[arg(short, long, value_name = "WAV")]
    pub output: PathBuf,
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
    #[arg(long, help_heading = "Engine boom")]
    pub f0: Option<f64>,
    #[arg(long, help_heading = "Engine boom")]
    pub harmonics: Option<u32>,
    #[arg(long, help_heading = "Engine boom")]
    pub rolloff_db: Option<f64>,
    #[arg(long, help_heading = "Engine boom")]
    pub mod_freq: Option<f64>,
    #[arg(long, help_heading = "Engine boom")]
    pub mod_depth: Option<f64>,
    #[arg(long, help_heading = "Wind whistle")]
    pub tone_freq: Option<f64>,
    #[arg(long, help_heading = "Wind whistle", allow_hyphen_values = true)]
    pub tone_level: Option<f64>,
    #[arg(long, help_heading = "Wind whistle", allow_hyphen_values = true)]
    pub noise_level: Option<f64>,
    #[arg(long, help_heading = "Road noise")]
    pub cutoff: Option<f64>,
    #[arg(long, help_heading = "Road noise", allow_hyphen_values = true)]
    pub level: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// WAV path, or `-` for stdin.
    pub input: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write records here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Stimuli per class.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(short, long, default_value = "dataset.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// logreg, rf or svm.
    pub kind: String,
    #[arg(long, default_value = "dataset.csv")]
    pub dataset: PathBuf,
    #[arg(short, long, default_value = "model.json")]
    pub output: PathBuf,
    /// Training seed (random forest and SVM).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, help_heading = "Random forest")]
    pub trees: Option<usize>,
    #[arg(long, help_heading = "Random forest")]
    pub max_features: Option<usize>,
    #[arg(long, help_heading = "SVM")]
    pub epochs: Option<usize>,
    #[arg(long, help_heading = "SVM")]
    pub lambda: Option<f64>,
    #[arg(long, help_heading = "Logistic regression")]
    pub learning_rate: Option<f64>,
    #[arg(long, help_heading = "Logistic regression")]
    pub iterations: Option<usize>,
    #[arg(long, help_heading = "Logistic regression")]
    pub l2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, default_value = "model.json")]
    pub model: PathBuf,
    #[arg(long, default_value = "dataset.csv")]
    pub dataset: PathBuf,
    #[arg(short, long, default_value = "eval.json")]
    pub output: PathBuf,
    #[arg(long, default_value = "confusion.csv")]
    pub confusion: PathBuf,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[arg(long, default_value = "dataset.csv")]
    pub dataset: PathBuf,
    #[arg(short, default_value_t = 2)]
    pub k: usize,
    #[arg(short, long, default_value = "pca_scatter.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(short, long, default_value = "repro")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trees: Option<usize>,
}

/// Parses `args` (program name first) and runs the chosen verb.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command_line: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match commands::dispatch(cli, command_line) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
