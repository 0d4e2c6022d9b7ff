//! Command-line front end for the rotec toolkit.
//!
//! Three operations share a scenario-file vocabulary: `sstar` builds
//! and caches the admissible set, `run` simulates a seed campaign and
//! writes trace/summary CSVs, and `sweep` repeats a campaign across a
//! parameter grid for box-plot-ready statistics. Exit codes: 0 on
//! success, 1 for configuration problems, 2 for numerical or design
//! failures.

mod commands;
mod pool;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{RunManifest, SstarManifest, SweepManifest};
use rotec::error::Result;

#[derive(Parser)]
#[command(name = "rotec", version, about = "Constrained command governor toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the constraint horizon and cache the admissible set.
    Sstar(SstarManifest),
    /// Simulate a scenario over a seed range; write trace and summary CSVs.
    Run(RunManifest),
    /// Re-run a scenario across a parameter grid; write distribution stats.
    Sweep(SweepManifest),
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Sstar(m) => commands::cmd_sstar(m),
        Cmd::Run(m) => commands::cmd_run(m),
        Cmd::Sweep(m) => commands::cmd_sweep(m),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
