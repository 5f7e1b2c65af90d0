//! `tqp`: model curves, parity-trace analysis and fits from a JSON config.

mod commands;
mod config;
mod failure;
mod output;

use clap::{Parser, Subcommand};
use commands::{Assignment, Recipe};
use failure::Failure;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "tqp",
    version,
    about = "Quasiparticle parity switching in SQUID transmons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transition frequencies and parity splittings over field, flux and offset charge.
    Spectrum {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Parity lifetimes and their contributions along a field or temperature grid.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Worker threads for the sweep points.
        #[arg(short, long, default_value_t = 1)]
        jobs: usize,
        /// Assignment whose contributions fill the decomposition columns.
        #[arg(long, value_enum, default_value_t = Assignment::Even)]
        assignment: Assignment,
    },
    /// Synthetic single-shot trace (CSV plus JSON sidecar).
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Hidden-Markov and spectral dwell times from a trace.
    Analyze {
        trace: PathBuf,
        /// Report path; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Fit a recipe to one or more measurement tables.
    Fit {
        #[arg(value_enum)]
        recipe: Recipe,
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        /// Report path; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum { config, out } => commands::spectrum(&config::load(&config)?, &out),
        Command::Sweep {
            config,
            out,
            jobs,
            assignment,
        } => {
            if jobs == 0 {
                return Err(Failure::usage("--jobs must be at least 1"));
            }
            commands::sweep(&config::load(&config)?, &out, jobs, assignment)
        }
        Command::Simulate { config, out, seed } => {
            commands::simulate(&config::load(&config)?, &out, seed)
        }
        Command::Analyze { trace, out } => commands::analyze(&trace, out.as_deref()),
        Command::Fit {
            recipe,
            config,
            data,
            out,
        } => commands::fit(&config::load(&config)?, recipe, &data, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tqp: error: {f}");
            ExitCode::from(f.code())
        }
    }
}
