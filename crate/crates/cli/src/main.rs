//! Command-line surface for the autoresonance laboratory.
//!
//! Four subcommands emit self-describing CSV: `simulate` (envelope equation
//! with linear or saturating sweep), `germ` (closed-form germ diagnostics),
//! `duffing` (full oscillator with demodulated envelope, optionally compared
//! against the envelope equation), and `sweep` (parameter scans with
//! power-law fits of the measured scaling laws).
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 integration
//! failure (a partial CSV is flushed with a trailing `# aborted` comment).

mod commands;
mod output;
mod settings;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "autoreson", version, about = "Chirped-drive autoresonance laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the envelope equation and emit tau, psi, and germ columns.
    Simulate(SimulateArgs),
    /// Evaluate the autoresonant germ and its diagnostics on a tau grid.
    Germ(GermArgs),
    /// Integrate the full oscillator and demodulate its envelope.
    Duffing(DuffingArgs),
    /// Scan (beta, f) pairs, measure fall times and peaks, fit power laws.
    Sweep(SweepArgs),
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file (when `--config` is given) and then to built-in defaults.
#[derive(Args, Clone)]
struct CommonArgs {
    /// Dissipation coefficient beta > 0.
    #[arg(long)]
    beta: Option<f64>,
    /// Drive amplitude f > 0.
    #[arg(long)]
    f: Option<f64>,
    /// Small parameter of the full oscillator model, in (0, 1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Real part of the initial envelope.
    #[arg(long = "psi0-re")]
    psi0_re: Option<f64>,
    /// Imaginary part of the initial envelope.
    #[arg(long = "psi0-im")]
    psi0_im: Option<f64>,
    /// Horizon in slow time tau (the duffing command integrates the
    /// oscillator to t = tau-max / epsilon^(2/3)).
    #[arg(long = "tau-max")]
    tau_max: Option<f64>,
    /// Relative integration tolerance.
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// Absolute integration tolerance.
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,
    /// Output sample spacing in the command's independent variable.
    #[arg(long)]
    stride: Option<f64>,
    /// Output path, or '-' for stdout.
    #[arg(long)]
    out: Option<String>,
    /// Plain-text key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Detuning sweep law.
    #[arg(long = "sweep-law", value_enum)]
    sweep_law: Option<LawArg>,
    /// Saturation scale of the saturating law; defaults to beta/f.
    #[arg(long = "sweep-scale")]
    sweep_scale: Option<f64>,
}

#[derive(Args)]
struct GermArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DuffingArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also solve the envelope equation and emit comparison columns.
    #[arg(long)]
    compare: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated beta values.
    #[arg(long = "beta-list", value_delimiter = ',')]
    beta_list: Option<Vec<f64>>,
    /// Comma-separated drive amplitudes.
    #[arg(long = "f-list", value_delimiter = ',')]
    f_list: Option<Vec<f64>>,
    /// Fall threshold as a fraction of the captured track, in (0, 1).
    #[arg(long = "c-fall")]
    c_fall: Option<f64>,
    /// Skip fall detection below this tau.
    #[arg(long = "tau-min")]
    tau_min: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum LawArg {
    Linear,
    Saturating,
}

impl fmt::Display for LawArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawArg::Linear => write!(f, "linear"),
            LawArg::Saturating => write!(f, "saturating"),
        }
    }
}

/// Errors carrying their process exit code.
#[derive(Debug)]
enum CliError {
    /// Bad flags, bad config file, or parameter validation failure.
    Usage(String),
    /// Integration aborted; partial output was flushed already.
    Runtime(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Germ(args) => commands::germ(args),
        Command::Duffing(args) => commands::duffing(args),
        Command::Sweep(args) => commands::sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("autoreson: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
