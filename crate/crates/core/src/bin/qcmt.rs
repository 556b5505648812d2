use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcmt::cli::{execute, Invocation, Mode};

/// Verification suites and experiments for measurement algebras and
/// Gaussian states. Set QCMT_LOG (e.g. `info`, `debug`) for diagnostics.
#[derive(Parser)]
#[command(name = "qcmt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algebra, Wick, bracket, positivity and field-kernel checks.
    Verify(Common),
    /// Tabulate expectation values of the configured words as CSV.
    Moments(Common),
    /// Gram matrix and spectrum of the monomial basis.
    Gram(Common),
    /// Vacuum and thermal kernel deviations under boosts, as CSV.
    BoostScan(Common),
    /// Vacuum-projector noncommutativity witness.
    Witness(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("QCMT_LOG", "warn")).init();
    let cli = Cli::parse();
    let (mode, common) = match cli.command {
        Command::Verify(c) => (Mode::Verify, c),
        Command::Moments(c) => (Mode::Moments, c),
        Command::Gram(c) => (Mode::Gram, c),
        Command::BoostScan(c) => (Mode::BoostScan, c),
        Command::Witness(c) => (Mode::Witness, c),
    };
    let inv = Invocation {
        config: common.config,
        out: common.out,
        seed: common.seed,
        tolerance: common.tolerance,
    };
    ExitCode::from(execute(mode, &inv) as u8)
}
