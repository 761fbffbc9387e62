//! `gaussvar`: runs the equivalence checks, the bosonic path-length sweep and
//! the invariant suite, writing JSON/CSV reports to the output directory.
//!
//! Exit status: 0 success, 1 a checked property failed, 2 usage or
//! configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;

#[derive(Parser)]
#[command(name = "gaussvar", version, about = "Gaussian-state ITE vs projected gradient descent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sets κ and dτ together (for `equivalence-sp`: dτ, with α = dτ/2).
    #[arg(long, global = true)]
    steps: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-particle grid: GD(α) against ITE(2α), and ITE against grid ED.
    EquivalenceSp,
    /// Fermionic GD(κ) against ITE(κ/8), and convergence to exact ground energies.
    FermionCompare,
    /// Path lengths of GD and ITE over the (a, b) grid of initial covariances.
    BosonSweep,
    /// Invariant and property checks.
    Validate {
        /// Run only checks whose category matches.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = config::load(cli.config.as_deref()).map_err(Failure::Usage)?;
    if let Some(s) = cli.steps {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Failure::Usage(format!("--steps must be positive and finite, got {s}")));
        }
    }
    let seed = cli.seed.unwrap_or(cfg.seed);
    commands::prepare_out_dir(&cli.out)?;
    match &cli.command {
        Command::EquivalenceSp => commands::equivalence_sp(&cfg.equivalence_sp, seed, cli.steps, &cli.out),
        Command::FermionCompare => commands::fermion_compare(&cfg.fermion_compare, seed, cli.steps, &cli.out),
        Command::BosonSweep => commands::boson_sweep(&cfg.boson_sweep, cli.steps, &cli.out),
        Command::Validate { filter } => commands::validate(&cfg.validate, seed, filter.as_deref(), &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
