//! `avbc` — command-line surface over the `avbc-core` library: closed-form
//! capacity regions, the minimax bound engine, symmetrizability checks,
//! Monte-Carlo coding simulations, and figure-data export.
//!
//! Results are written as CSV (header row with axis labels, 6-decimal
//! precision) and JSON files into `--out`; stdout carries a one-line summary.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod config;
mod ops;

/// Failures split by exit code: rejected input exits 1, runtime trouble 2.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Runtime(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<avbc_core::Error> for Failure {
    fn from(e: avbc_core::Error) -> Failure {
        match e {
            // the scan/enumeration envelopes are hit mid-computation, after
            // the inputs themselves have validated
            avbc_core::Error::TooLarge(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "avbc",
    about = "Capacity regions, symmetrizability tests, and coding simulations for \
             state-dependent broadcast channels with causal encoder side information",
    after_help = "Environment:\n  AVBC_THREADS   worker threads for simulation runs \
                  (default: available parallelism)\n\nExit codes: 0 ok, 1 invalid input, \
                  2 runtime failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON file with channel parameters and operation settings
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Sweep/search grid points (per-command default when omitted)
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Master seed for randomized commands
    #[arg(long, global = true, default_value_t = 7001)]
    seed: u64,

    /// Monte-Carlo trials per simulation run
    #[arg(long, global = true, default_value_t = 2000)]
    trials: u64,

    /// Decoder typicality slack
    #[arg(long, global = true, default_value_t = 0.05)]
    delta: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-state capacity region, or inner/outer bounds in the split case
    Region,
    /// Known-state-frequency capacity region at a fixed frequency q
    RpCapacity,
    /// Achievable region without encoder state information
    Jahn,
    /// Simultaneous-minimizer check over the auxiliary family
    ConditionT,
    /// Symmetrizability of the per-user strategy channels, or of a raw channel
    Symmetrizable,
    /// Minimax engine bounds, compared to the closed form where one exists
    DegradedCheck,
    /// Monte-Carlo error rate of a superposition strategy code
    Simulate,
    /// Reduced uniform family of permuted codes
    Eliminate,
    /// Figure data: capacity curve families as CSV plus JSON metadata
    Figure {
        /// One of fig2, fig3, fig4 (parameter sets are fixed per figure)
        name: String,
        /// Output directory (overrides --out)
        dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match ops::dispatch(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
