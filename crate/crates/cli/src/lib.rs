//! `tbf` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 a
//! verification threshold was missed, 64 usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod config;
mod data;
mod output;
mod verify;
mod wknn;

pub use config::{CliConfig, WknnConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_THRESHOLD: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Threshold(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "error: {m}"),
            CliError::Threshold(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<tbf_core::Error> for CliError {
    fn from(e: tbf_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Threshold(_) => EXIT_THRESHOLD,
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tbf", version, about = "Triple-beam fingerprint engine")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// SNR of generated fingerprints and queries, in dB; noiseless when absent.
    #[arg(long = "snr-db", global = true, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Mask threshold; `preprocess sweep` accepts a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Neighbours used by WKNN.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Round every path to its nearest grid bin.
    #[arg(long = "snap-to-grid", global = true)]
    pub snap_to_grid: bool,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scene geometry.
    #[command(subcommand)]
    Scene(SceneCmd),
    /// Fingerprint databases on disk.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Numerical property checks with pass/fail thresholds.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Inspect a single fingerprint.
    #[command(subcommand)]
    Fingerprint(FingerprintCmd),
    /// Network input maps.
    #[command(subcommand)]
    Preprocess(PreprocessCmd),
    /// Nearest-neighbour localization baseline.
    #[command(subcommand)]
    Wknn(WknnCmd),
    /// Validate a dataset directory and rewrite it under `--out`.
    Export(ExportArgs),
}

#[derive(Debug, Subcommand)]
pub enum SceneCmd {
    /// Place the base station and scatterers; writes `scene.json`.
    Gen,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCmd {
    /// Fingerprint every grid point and write manifest plus blobs.
    Build,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Per-path energy concentration; off-grid sweeps unless snapped.
    Theorem1(Theorem1Args),
    /// Collinearity of fingerprint pairs against their covariances.
    Theorem2(Theorem2Args),
    /// Sum preservation, extension deviations and the trace identity.
    Lemmas(LemmasArgs),
}

#[derive(Debug, Args)]
pub struct Theorem1Args {
    #[arg(long, default_value_t = 3)]
    pub paths: usize,
    /// Dimension doublings per axis in the off-grid sweep.
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
}

#[derive(Debug, Args)]
pub struct Theorem2Args {
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 3)]
    pub paths: usize,
    /// Largest admissible collinearity gap.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct LemmasArgs {
    #[arg(long, default_value_t = 50)]
    pub seeds: u64,
}

#[derive(Debug, Subcommand)]
pub enum FingerprintCmd {
    /// Fingerprint one UT and write its marginal maps and slices as CSV.
    Show(ShowArgs),
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let v = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"))).collect::<Result<Vec<_>, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected x,y,z, got {} values", v.len()))
}

#[derive(Debug, Args)]
pub struct ShowArgs {
    /// UT position `x,y,z` in metres.
    #[arg(long, default_value = "5,5,1.5", value_parser = parse_point, allow_hyphen_values = true)]
    pub position: [f64; 3],
    /// Direction of motion in radians, 0 along +x.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub heading: f64,
}

#[derive(Debug, Subcommand)]
pub enum PreprocessCmd {
    /// Mask support over a list of thresholds.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Dataset directory; built from the configuration when absent.
    #[arg(long, value_name = "DIR")]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum WknnCmd {
    /// Localization error of WKNN against a fingerprint database.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Database directory; built from the configuration when absent.
    #[arg(long, value_name = "DIR")]
    pub db: Option<PathBuf>,
    /// Query directory; random test UTs from the configuration when absent.
    #[arg(long, value_name = "DIR")]
    pub queries: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Dataset directory to export; built from the configuration when absent.
    #[arg(long, value_name = "DIR")]
    pub from: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> CliResult {
    let mut cfg = CliConfig::load(cli.global.config.as_deref())?;
    cfg.apply(&cli.global)?;
    let g = &cli.global;
    match cli.command {
        Command::Scene(SceneCmd::Gen) => data::scene_gen(&cfg, g),
        Command::Dataset(DatasetCmd::Build) => data::dataset_build(&cfg, g),
        Command::Verify(VerifyCmd::Theorem1(a)) => verify::theorem1(&cfg, g, &a),
        Command::Verify(VerifyCmd::Theorem2(a)) => verify::theorem2(&cfg, g, &a),
        Command::Verify(VerifyCmd::Lemmas(a)) => verify::lemmas(&cfg, g, &a),
        Command::Fingerprint(FingerprintCmd::Show(a)) => data::fingerprint_show(&cfg, g, &a),
        Command::Preprocess(PreprocessCmd::Sweep(a)) => data::preprocess_sweep(&cfg, g, &a),
        Command::Wknn(WknnCmd::Eval(a)) => wknn::eval(&cfg, g, &a),
        Command::Export(a) => data::export(&cfg, g, &a),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = if cli.global.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
