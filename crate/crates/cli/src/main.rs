//! `gqfi`: Fisher information bounds, SLD reports, homodyne analyses and
//! Fock-space cross-checks for Gaussian models described by config files.
//!
//! Exit codes: 0 success, 2 config or I/O error, 3 numerical rejection,
//! 64 usage error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussian_qfi::oracle::{MIN_CUTOFF, ORACLE_STEP};
use gaussian_qfi::symplectic::DEFAULT_TOL;

#[derive(Parser, Debug)]
#[command(name = "gqfi", version, about = "Quantum Fisher information of Gaussian models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fisher information report at the configured θ.
    Qfi {
        config: PathBuf,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Evaluate a θ grid and write CSV.
    Sweep(SweepArgs),
    /// SLD coefficients and the photon-counting form.
    Sld {
        config: PathBuf,
        #[command(flatten)]
        engine: EngineOpts,
        /// Generalized inverse of D_Γ used for L.
        #[arg(long, value_enum, default_value_t = InverseArg::Frame)]
        inverse: InverseArg,
    },
    /// Optimal homodyne measurement of an isothermal model.
    Homodyne(HomodyneArgs),
    /// Compare the engine against the truncated Fock-space oracle.
    OracleCheck {
        config: PathBuf,
        #[command(flatten)]
        engine: EngineOpts,
        /// Per-mode Fock cutoff; defaults to an estimate from the mean photon number.
        #[arg(long, value_parser = clap::value_parser!(u64).range(MIN_CUTOFF as u64..))]
        cutoff: Option<u64>,
        /// Central-difference step in θ.
        #[arg(long, default_value_t = ORACLE_STEP)]
        h: f64,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct EngineOpts {
    /// Kernel/range tolerance of the D_Γ solver and isothermal checks.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// QFI formula: `auto` uses the isothermal closed form when it applies.
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    config: PathBuf,
    #[command(flatten)]
    engine: EngineOpts,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    /// Number of grid points including both ends; 0 writes only the header.
    #[arg(long)]
    steps: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Columns to fill; `oracle` adds an `oracle_qfi` column.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [OutputArg::Qfi, OutputArg::Wigner, OutputArg::HomodyneOpt])]
    outputs: Vec<OutputArg>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Oracle cutoff; defaults to an estimate per θ.
    #[arg(long, value_parser = clap::value_parser!(u64).range(MIN_CUTOFF as u64..))]
    oracle_cutoff: Option<u64>,
    /// Oracle central-difference step.
    #[arg(long, default_value_t = ORACLE_STEP)]
    oracle_h: f64,
}

#[derive(Args, Debug)]
struct HomodyneArgs {
    config: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Number of random symplectic measurements to test against the optimum.
    #[arg(long = "random-U", value_name = "N")]
    random_u: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest single-mode squeezing of the random measurements.
    #[arg(long, default_value_t = 2.0)]
    squeeze_cap: f64,
    /// Estimator coefficients α (comma separated) to build a passive network for.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    estimator: Option<Vec<f64>>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Auto,
    General,
    Isothermal,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum InverseArg {
    Frame,
    MoorePenrose,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum OutputArg {
    Qfi,
    Wigner,
    HomodyneOpt,
    Oracle,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
