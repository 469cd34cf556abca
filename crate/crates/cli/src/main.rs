//! Command-line driver: geodesic sweeps, self-tests, oracle comparisons and
//! manufactured solves.

mod commands;
mod config;
mod report;
mod selftest;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "epsgeo",
    version,
    about = "Geodesics in the space of Kähler potentials on the flat torus"
)]
struct Cli {
    /// Maximum worker threads. Accepted and recorded as a cap; the current
    /// implementation computes on a single thread.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Output directory, overriding the config [output] section.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the regularized geodesic family and emit diagnostics.
    Geodesic {
        /// Run configuration (INI).
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the deterministic eigenvalue-calculus and stencil self-tests.
    Selftest,
    /// Compare a solved x-only sweep against the Legendre-transform oracle.
    OracleCompare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Manufactured-solution solve of the nondegenerate equation.
    SolveMa {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("--threads must be at least 1");
        std::process::exit(commands::EXIT_CONFIG);
    }
    let out = cli.out.as_deref();
    let code = match &cli.command {
        Command::Geodesic { config } => commands::cmd_geodesic(config, out),
        Command::Selftest => selftest::cmd_selftest(),
        Command::OracleCompare { config } => commands::cmd_oracle_compare(config, out),
        Command::SolveMa { config } => commands::cmd_solve_ma(config, out),
    };
    std::process::exit(code);
}
