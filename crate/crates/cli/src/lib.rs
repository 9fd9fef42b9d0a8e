//! Reproducible experiments comparing `P_k` and `P_m` finite element accuracy.
//!
//! Every subcommand renders its CSV into memory first and writes it in one
//! piece to `--out` (or standard output). Diagnostics go to standard error.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::Outcome;

/// Exit status when a requested validation fails.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for invalid parameters or I/O failures.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "relacc", version, about = "Relative accuracy laws for P_k versus P_m finite elements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the two-step and sigmoid laws: `h,p_two_step,p_sigmoid`.
    Law(LawArgs),
    /// Monte Carlo validation of the sigmoid law: `h,p_analytic,p_hat,std_error,within_3sigma`.
    Mc(McArgs),
    /// Convergence study with fitted error constants.
    Fem(FemArgs),
    /// Empirical superiority sweep against the fitted sigmoid law.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment seed.
    #[arg(long, default_value_t = 2026)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File of `key=value` lines; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Error constant of the low-order element.
    #[arg(long, default_value_t = 1.0)]
    pub ck: f64,
    /// Low polynomial order.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Error constant of the high-order element.
    #[arg(long, default_value_t = 2.0)]
    pub cm: f64,
    /// High polynomial order.
    #[arg(long, default_value_t = 2)]
    pub m: u32,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Smallest mesh size; defaults to h*/10.
    #[arg(long)]
    pub h_min: Option<f64>,
    /// Largest mesh size; defaults to 10 h*.
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    /// Insert h* itself into the grid.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub include_h_star: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LawArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Monte Carlo trials per grid point.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Acceptance band in standard deviations.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FemArgs {
    #[command(flatten)]
    pub common: Common,
    /// Library problem: sin, sin:<a>, quadratic, power:<alpha>.
    #[arg(long, default_value = "sin")]
    pub problem: String,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub orders: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128,256,512")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Meshes per resolution.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Pin the fitted rate to the element order.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub fix_rate: bool,
    /// Accepted distance between free-fit rate and element order.
    #[arg(long, default_value_t = 0.15)]
    pub rate_tol: f64,
    /// Output file for the fitted-law summary; follows the records when omitted.
    #[arg(long)]
    pub fit_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "sin")]
    pub problem: String,
    #[arg(long, default_value_t = 1)]
    pub low: u32,
    #[arg(long, default_value_t = 2)]
    pub high: u32,
    /// Element counts of the superiority sweep.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,6,8,12,16,24,32")]
    pub n_list: Vec<usize>,
    /// Mesh pairs per resolution.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.3)]
    pub jitter: f64,
    /// Element counts used to fit the error constants.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
    pub fit_n: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub fit_trials: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub fix_rate: bool,
    /// Accepted ratio between the empirical 0.5-crossing and the fitted h*.
    #[arg(long, default_value_t = 2.0)]
    pub crossing_factor: f64,
    /// Minimum frequency required at the finest resolution.
    #[arg(long, default_value_t = 0.95)]
    pub finest_min: f64,
}

/// Parses, runs and writes. Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let raw: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let expanded = match config::expand_args(raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(expanded) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Law(a) => commands::law(a).map(|o| (o, &a.common)),
        Command::Mc(a) => commands::mc(a).map(|o| (o, &a.common)),
        Command::Fem(a) => commands::fem(a).map(|o| (o, &a.common)),
        Command::Compare(a) => commands::compare(a).map(|o| (o, &a.common)),
    };
    let (outcome, common) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    for line in &outcome.diagnostics {
        eprintln!("{line}");
    }
    if let Err(e) = emit(common.out.as_ref(), &outcome.data) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    for (path, text) in &outcome.extra_files {
        if let Err(e) = fs::write(path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if outcome.passed {
        0
    } else {
        EXIT_VALIDATION
    }
}

fn emit(path: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}
