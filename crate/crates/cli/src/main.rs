//! `moikit`: evaluate operator integrals, derivatives and remainders, run
//! Monte Carlo experiments, decompose polynomials and sample unitaries.
//!
//! Exit status: 0 success, 2 invalid input or usage, 3 numerical failure,
//! 4 a tail bound was violated.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "moikit", version, about = "Multiple operator integrals of finite-dimensional operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Request or experiment JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Overrides the seed of seeded documents.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a multiple operator integral.
    MoiEval(Common),
    /// First derivative of f along a direction.
    Frechet(Common),
    /// k-th derivative of f along a direction.
    KthDeriv(Common),
    /// k-th operator difference.
    HigherDiff(Common),
    /// Taylor remainder, self-adjoint or unitary.
    Remainder(Common),
    /// Monte Carlo check of a tail bound.
    Tailbound(Common),
    /// Convergence in the r-th mean.
    ConvMean(Common),
    /// Inner-power and linear-product decompositions of a polynomial.
    PolyDecompose(Common),
    /// Haar-distributed unitary samples.
    Haar(HaarArgs),
    /// Multiple tensor integral.
    MtiEval(Common),
    /// Check a document without running it; always exits 0.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct HaarArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MOIKIT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run::dispatch(cli.command) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("moikit: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
