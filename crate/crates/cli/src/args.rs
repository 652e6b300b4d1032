//! Command-line flags. Every tunable is optional here so that a config file
//! can fill it in; see [`crate::config`] for the precedence rules.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heartid_core::classify::KernelSpec;
use heartid_core::embedding::ProjectionMethod;
use heartid_core::mfcc::FeatureKind;
use heartid_core::synth::RenderMode;
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "heartid", version, about = "Radar heartbeat identification toolkit")]
pub struct Cli {
    /// TOML file with [synth], [features], [echo], [svm] and [tsne] tables.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic cohort into a dataset directory.
    Synth(SynthArgs),
    /// Compute one feature kind for every (segmented) measurement.
    Extract(ExtractArgs),
    /// Fit a one-vs-rest SVM on a feature CSV.
    Train(TrainArgs),
    /// Leave-one-session-out cross-validation on a feature CSV.
    Eval(EvalArgs),
    /// 2-D PCA or t-SNE projection of a feature CSV.
    Project(ProjectArgs),
    /// Extract and evaluate all four feature kinds and tabulate them.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Six well-separated participants at 20 dB.
    Default,
    /// Six participants with overlapping heart rates at 10 dB.
    Hard,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<RenderMode>,
    /// Seconds per measurement.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Slow-time sampling rate (Hz).
    #[arg(long)]
    pub fs: Option<f64>,
    /// Use `inf` for a noiseless render.
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Days of recording, two sessions each.
    #[arg(long)]
    pub days: Option<u32>,
    /// Measurements per participant and session.
    #[arg(long)]
    pub repetitions: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FeatureFlags {
    /// Retained DCT coefficients per side (K').
    #[arg(long)]
    pub k_prime: Option<usize>,
    /// Mel filters (L).
    #[arg(long = "filters")]
    pub n_filters: Option<usize>,
    /// Mel reference frequency (Hz).
    #[arg(long)]
    pub f_ref: Option<f64>,
    /// Mel upper anchor frequency (Hz).
    #[arg(long)]
    pub f_prime: Option<f64>,
    /// STFT window length (s).
    #[arg(long)]
    pub window: Option<f64>,
    /// STFT hop (s).
    #[arg(long)]
    pub hop: Option<f64>,
    /// Take the log of mel energies before the DCT.
    #[arg(long)]
    pub log_energies: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SvmFlags {
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<KernelSpec>,
    /// Soft-margin penalty.
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// RBF width; default 1 / (d * Var).
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_kind, default_value = "prop")]
    pub kind: FeatureKind,
    /// Split each measurement into pieces of this many seconds first.
    #[arg(long, value_name = "SECONDS")]
    pub segment: Option<f64>,
    #[command(flatten)]
    pub features: FeatureFlags,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "CSV")]
    pub features: PathBuf,
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    #[command(flatten)]
    pub svm: SvmFlags,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "CSV")]
    pub features: PathBuf,
    /// Receives report.json and report_confusion.csv (plus report_confusion.svg).
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Also draw the confusion matrix as SVG.
    #[arg(long)]
    pub svg: bool,
    /// Stamp the report with the wall-clock time (breaks byte-identical reruns).
    #[arg(long)]
    pub timestamp: bool,
    #[command(flatten)]
    pub svm: SvmFlags,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(long, value_name = "CSV")]
    pub features: PathBuf,
    /// Projection CSV: sample_id,label,x,y.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "tsne")]
    pub method: ProjectionMethod,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Scatter plot destination.
    #[arg(long, value_name = "SVG")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, value_name = "SECONDS")]
    pub segment: Option<f64>,
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub timestamp: bool,
    #[command(flatten)]
    pub features: FeatureFlags,
    #[command(flatten)]
    pub svm: SvmFlags,
}

fn parse_mode(s: &str) -> Result<RenderMode, String> {
    s.parse().map_err(|e: heartid_core::Error| e.to_string())
}

fn parse_kernel(s: &str) -> Result<KernelSpec, String> {
    s.parse().map_err(|e: heartid_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<FeatureKind, String> {
    s.parse().map_err(|e: heartid_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<ProjectionMethod, String> {
    s.parse().map_err(|e: heartid_core::Error| e.to_string())
}
