//! Command-line surface for the condition-monitoring engines.
//!
//! The pipeline is file-based throughout: `gen` writes series CSVs, the
//! `train-*` commands turn a healthy series into a JSON model, the
//! `monitor-*` commands compare fresh data against a model and emit a report
//! plus a raw trace, `report` renders a saved report for humans and plotting
//! tools, and `experiment` packages the whole flow into reproducible suites.
//!
//! Exit codes form the machine contract: 0 means the monitored data looked
//! normal, 2 means at least one fault was flagged, and 1 means the invocation
//! itself failed (bad flags, unreadable files, invalid configuration). The
//! `SENTINEL_LOG` environment variable (`error`, `info` or `debug`) controls
//! diagnostic verbosity on stderr.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod experiments;
pub mod render;

#[derive(Debug, Parser)]
#[command(
    name = "sentinel",
    version,
    about = "Anomaly detection for quasi-periodic signals: negative-selection and grammar engines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic series as CSV.
    Gen(GenArgs),
    /// Censor random detectors against a healthy series and save the set.
    TrainImmune(TrainImmuneArgs),
    /// Slide a saved detector set over a series; exit 2 on any activation.
    MonitorImmune(MonitorImmuneArgs),
    /// Learn production rules from a healthy input/output pair and save them.
    TrainGrammar(TrainGrammarArgs),
    /// Compare an input/output pair against a saved grammar; exit 2 on any
    /// fault segment.
    MonitorGrammar(MonitorGrammarArgs),
    /// Render a saved report as text plus a plot-ready trace CSV.
    Report(ReportArgs),
    /// Run a packaged end-to-end experiment into a directory.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub source: GenSource,
}

#[derive(Debug, Subcommand)]
pub enum GenSource {
    /// Pure tone `amp·sin(2π·freq·t)`.
    Sine(ToneArgs),
    /// The same tone with its frequency raised by 10%.
    FreqShifted(ToneArgs),
    /// Two-component tone `0.5·amp·(sin(2π·freq·t) + sin(2π·2freq·t))`.
    Composite(ToneArgs),
    /// Stator-current series from a packaged induction-motor profile.
    Motor(MotorArgs),
    /// Load-command / dq-magnitude pair from a packaged motor profile.
    MotorDq(MotorArgs),
}

#[derive(Debug, Args)]
pub struct ToneArgs {
    /// Peak amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub amp: f64,
    /// Base frequency in hertz.
    #[arg(long, default_value_t = 1.0)]
    pub freq: f64,
    /// Sampling step in seconds.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Output CSV path.
    #[arg(short, long, value_name = "FILE")]
    pub out: PathBuf,
}

/// Packaged induction-motor operating profiles shared by `gen` and the
/// motor experiment suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MotorProfile {
    /// Three increasing healthy load stages.
    Normal,
    /// A light constant load with a healthy rotor.
    Unloaded,
    /// Four increasing load stages with a broken-bar signature.
    Progression,
    /// Healthy unloaded running followed by a loaded broken-bar stage.
    Transition,
}

#[derive(Debug, Args)]
pub struct MotorArgs {
    /// Operating profile to synthesise.
    #[arg(long, value_enum)]
    pub profile: MotorProfile,
    /// Sampling step in seconds.
    #[arg(long, default_value_t = 2e-4)]
    pub dt: f64,
    /// Standard deviation of added sensor noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Seed for the sensor-noise stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(short, long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainImmuneArgs {
    /// Healthy training series (CSV).
    #[arg(long = "self", value_name = "FILE")]
    pub self_series: PathBuf,
    /// Quantisation bits per sample.
    #[arg(long, default_value_t = 8)]
    pub bits: u8,
    /// Window width in samples.
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    /// Matching fraction; the activation radius is `md·√window`.
    #[arg(long, default_value_t = 0.2)]
    pub md: f64,
    /// Number of detectors to place.
    #[arg(long, default_value_t = 30)]
    pub detectors: usize,
    /// Detector-generation seed.
    #[arg(long)]
    pub seed: u64,
    /// Encoding range floor; omit both bounds to fit them from the data.
    #[arg(long, requires = "max", allow_negative_numbers = true)]
    pub min: Option<f64>,
    /// Encoding range ceiling; omit both bounds to fit them from the data.
    #[arg(long, requires = "min", allow_negative_numbers = true)]
    pub max: Option<f64>,
    /// Fraction of the observed span padded on each side when fitting.
    #[arg(long, default_value_t = 0.05)]
    pub headroom: f64,
    /// Encode absolute values instead of signed ones.
    #[arg(long)]
    pub abs: bool,
    /// Candidate-draw budget override (default 10000 per detector).
    #[arg(long)]
    pub max_attempts: Option<u64>,
    /// Time step for CSV inputs without a time column.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Output model path (JSON).
    #[arg(short, long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MonitorImmuneArgs {
    /// Series to monitor (CSV).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Saved detector set (JSON).
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Time step for CSV inputs without a time column.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Report output path (JSON).
    #[arg(short, long, default_value = "report.json", value_name = "FILE")]
    pub out: PathBuf,
    /// Activation-event CSV output path.
    #[arg(long, default_value = "events.csv", value_name = "FILE")]
    pub events: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainGrammarArgs {
    /// Healthy input/output pair (CSV with `time,u,y` or `u,y` columns).
    #[arg(long, value_name = "FILE")]
    pub pair: PathBuf,
    /// Quantisation bits shared by both channels.
    #[arg(long, default_value_t = 3)]
    pub bits: u8,
    /// Level-grid floor shared by both channels; omit both bounds to fit.
    #[arg(long, requires = "max", allow_negative_numbers = true)]
    pub min: Option<f64>,
    /// Level-grid ceiling shared by both channels; omit both bounds to fit.
    #[arg(long, requires = "min", allow_negative_numbers = true)]
    pub max: Option<f64>,
    /// Fraction of the observed span padded on each side when fitting.
    #[arg(long, default_value_t = 0.05)]
    pub headroom: f64,
    /// Deepest context length learned.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Time step for CSV inputs without a time column.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Output model path (JSON).
    #[arg(short, long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MonitorGrammarArgs {
    /// Input/output pair to monitor (CSV).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Saved grammar (JSON).
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Symbols per compared word.
    #[arg(long, default_value_t = 50)]
    pub word: usize,
    /// Edit distance above which (strictly) a word is a fault.
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,
    /// Substitution cost.
    #[arg(long, default_value_t = 1.0)]
    pub sub: f64,
    /// Insertion cost.
    #[arg(long, default_value_t = 1.0)]
    pub ins: f64,
    /// Deletion cost.
    #[arg(long, default_value_t = 1.0)]
    pub del: f64,
    /// Time step for CSV inputs without a time column.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Report output path (JSON).
    #[arg(short, long, default_value = "report.json", value_name = "FILE")]
    pub out: PathBuf,
    /// Per-segment CSV output path.
    #[arg(long, default_value = "segments.csv", value_name = "FILE")]
    pub segments: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Saved report (JSON).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Text output path; stdout when omitted.
    #[arg(short, long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Plot-ready trace CSV output path.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(subcommand)]
    pub suite: Suite,
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Tone experiment: censor detectors on a pure tone, then monitor the
    /// tone itself, a frequency-shifted variant and a composite variant.
    SineSuite(SuiteArgs),
    /// Motor experiment: both engines trained on a healthy staged profile,
    /// then pointed at a load transition and a worsening fault progression.
    MotorSuite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Directory receiving every artifact (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Detector-generation seed (default: the suite's published seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Execute a parsed invocation, returning the process exit code.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Gen(args) => commands::gen(&args).map(|()| 0),
        Command::TrainImmune(args) => commands::train_immune(&args).map(|()| 0),
        Command::MonitorImmune(args) => commands::monitor_immune(&args),
        Command::TrainGrammar(args) => commands::train_grammar(&args).map(|()| 0),
        Command::MonitorGrammar(args) => commands::monitor_grammar(&args),
        Command::Report(args) => commands::render_report(&args).map(|()| 0),
        Command::Experiment(args) => experiments::run(&args),
    }
}
