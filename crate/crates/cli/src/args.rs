// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebs_core::transform::{AcdOrder, Dampening};

#[derive(Debug, Parser)]
#[command(name = "ebs", version, about = "Change-point detection in financial durations")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect change-points in a timestamp or duration file.
    Detect(DetectArgs),
    /// Write a simulated path from a named benchmark model.
    Simulate(SimulateArgs),
    /// Run a false-positive or accuracy simulation study.
    Bench(BenchArgs),
    /// Calibrate the CUSUM threshold constant by simulation.
    Calibrate(CalibrateArgs),
    /// False-positive rates over an (M, pi_thr, T) grid.
    Grid(GridArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Bs,
    Wbs,
    Ebs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectArg {
    Threshold,
    AboveMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutArg {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Timestamps,
    Durations,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input file, one value per line.
    pub input: PathBuf,

    #[arg(long, value_enum, default_value = "timestamps")]
    pub format: FormatArg,

    #[arg(long, value_enum, default_value = "ebs")]
    pub method: MethodArg,

    /// Number of random draws (EBS only).
    #[arg(long = "M")]
    pub draws: Option<usize>,

    /// Relative vote threshold in [0, 1] (EBS only).
    #[arg(long = "pi-thr")]
    pub pi_thr: Option<f64>,

    /// Vote selection rule (EBS only).
    #[arg(long = "select", value_enum)]
    pub select: Option<SelectArg>,

    /// Shortest interval binary segmentation will split.
    #[arg(long = "min-len", default_value_t = 20)]
    pub min_len: usize,

    /// Minimum distance between reported points (default ceil(0.005 T)).
    #[arg(long)]
    pub delta: Option<usize>,

    /// Random intervals for WBS.
    #[arg(long = "wbs-draws", default_value_t = 5000)]
    pub wbs_draws: usize,

    /// ACD order as `p,q`.
    #[arg(long, default_value = "0,1")]
    pub order: AcdOrder,

    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,

    /// `auto` or a fixed factor >= 1.
    #[arg(long, default_value = "auto")]
    pub dampening: Dampening,

    /// Divide out an intraday time-of-day profile first.
    #[arg(long)]
    pub deseasonalize: bool,

    /// Trading session for deseasonalisation, `HH:MM-HH:MM`.
    #[arg(long, default_value = "09:30-16:00")]
    pub session: String,

    /// Time-of-day bin width in minutes.
    #[arg(long = "bin-minutes", default_value_t = 10.0)]
    pub bin_minutes: f64,

    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,

    /// Threshold calibration file (default: the bundled one).
    #[arg(long = "calibration-file")]
    pub calibration_file: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "text")]
    pub out: OutArg,

    /// Append per-hour counts of detected change-points.
    #[arg(long)]
    pub histogram: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model name: S1..S5, EQ10, B1..B4.
    #[arg(long)]
    pub model: String,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Write event times instead of durations.
    #[arg(long)]
    pub timestamps: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyArg {
    Stationary,
    Nonstationary,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "stationary")]
    pub study: StudyArg,

    /// Comma-separated model names (default: all models of the study).
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,

    /// Comma-separated methods (default: bs,wbs,ebs).
    #[arg(long, value_delimiter = ',', value_enum)]
    pub methods: Vec<MethodArg>,

    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Write the report as CSV here (default: CSV on stdout).
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Also write the report as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000,8000,16000,32000")]
    pub grid: Vec<usize>,

    #[arg(long, default_value_t = 200)]
    pub reps: usize,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,

    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "T", value_delimiter = ',', default_value = "1000,2000")]
    pub lengths: Vec<usize>,

    #[arg(long = "M", value_delimiter = ',', default_value = "100,500,5000")]
    pub draws: Vec<usize>,

    #[arg(long = "pi-thr", value_delimiter = ',', default_value = "0,0.01,0.05,0.1")]
    pub pi_thr: Vec<f64>,

    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Threshold calibration file (default: the bundled one).
    #[arg(long = "calibration-file")]
    pub calibration_file: Option<PathBuf>,
}
