//! `ndpo`: parameter sweeps, cross-engine validation and plot scripts.
//!
//! Times are in units of 1/γ. Verbosity follows the `NDPO_LOG` environment
//! variable (`error`, `warn`, `info`, `debug`, `trace`).

mod config;
mod plot;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ndpo", version, about = "Nondegenerate parametric oscillator toolkit")]
struct Cli {
    /// JSON file with defaults; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-mode variances against time.
    SweepTime(SweepTimeArgs),
    /// Steady-state two-mode variances against reservoir squeezing r.
    SweepR(SweepRArgs),
    /// Cross-engine and limiting-case checks; exit status 0 iff all pass.
    Validate(ValidateArgs),
    /// Writes a matplotlib script that plots a sweep CSV.
    PlotScript(PlotArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kappa_gamma0: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineArg {
    /// Full two-mode Liouvillian; cost grows as n_cut^4.
    Direct,
    /// Exact normal-mode factorization; symmetric damping only.
    NormalMode,
}

#[derive(Args, Debug)]
pub struct SweepTimeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Final time γt.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of intervals; the grid has steps + 1 points.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Add numeric columns from the Fock engine.
    #[arg(long)]
    pub numeric: bool,
    #[arg(long)]
    pub ncut: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepRArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Sweep r over [0, r_max].
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Pump at threshold, κγ₀ = γ/2.
    #[arg(long)]
    pub threshold: bool,
    /// Add steady states from the normal-mode engine with cutoff escalation.
    #[arg(long)]
    pub numeric: bool,
    /// Starting cutoff for the escalation.
    #[arg(long)]
    pub ncut: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Replace the default matrix with one case at these parameters.
    #[command(flatten)]
    pub params: ParamArgs,
    /// JSON array of validation cases replacing the default matrix.
    #[arg(long, conflicts_with_all = ["gamma", "kappa_gamma0", "r"])]
    pub matrix: Option<PathBuf>,
    /// Keep only cases or limit entries with this tag; repeatable.
    #[arg(long = "case")]
    pub cases: Vec<String>,
    /// Skip the limiting-case suite.
    #[arg(long)]
    pub no_limits: bool,
    /// Skip the cross-engine matrix.
    #[arg(long)]
    pub no_matrix: bool,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub ncut: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long)]
    pub variance_tolerance: Option<f64>,
    #[arg(long)]
    pub q_tolerance: Option<f64>,
    /// JSON report; a summary table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// CSV written by sweep-time or sweep-r.
    #[arg(long)]
    pub input: PathBuf,
    /// Log scale for the v2 panel; defaults to on for sweep-r data.
    #[arg(long)]
    pub log_v2: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NDPO_LOG", "warn")).init();
    let cli = Cli::parse();
    let file = match cli.config.as_deref().map(config::FileConfig::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::SweepTime(a) => sweep::sweep_time(&file, &a).map(|_| true),
        Command::SweepR(a) => sweep::sweep_r(&file, &a).map(|_| true),
        Command::Validate(a) => validate::run(&file, &a),
        Command::PlotScript(a) => plot::run(&a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
