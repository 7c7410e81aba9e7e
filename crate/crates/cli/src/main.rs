//! `restraint-games`: classify, oracle, sweep and simulate from the shell.
//!
//! Exit codes: 0 success, 1 validation error, 2 oracle discrepancy, 3
//! oracle size guard. Failures print one `error[kind]: reason` line on
//! standard error.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use restraint_core::Error;

use config::{CommandKind, Flags, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "restraint-games",
    version,
    about = "Equilibria of restraint-signaling games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form pooling, separating and type-shift conditions at one point.
    Classify(Flags),
    /// Brute-force weak PBE enumeration on a signal grid.
    Oracle(Flags),
    /// Classify a parameter grid into equilibrium regions.
    Sweep(Flags),
    /// Monte Carlo play with type drift.
    Simulate(Flags),
}

impl Command {
    fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Classify(f) => (CommandKind::Classify, f),
            Command::Oracle(f) => (CommandKind::Oracle, f),
            Command::Sweep(f) => (CommandKind::Sweep, f),
            Command::Simulate(f) => (CommandKind::Simulate, f),
        }
    }
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_DISCREPANCY: u8 = 2;
const EXIT_SIZE_GUARD: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RESTRAINT_GAMES_LOG", "error"))
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let first = err.to_string();
            let line = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", line.trim_start_matches("error: "));
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let (kind, flags) = cli.command.split();

    let config = match RunConfig::build(kind, &flags) {
        Ok(config) => config,
        Err(err) => return report(err, "-"),
    };
    if let Some(jobs) = config.jobs {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size worker pool: {err}");
        }
    }
    if flags.dump_config {
        let mut out = std::io::stdout().lock();
        let written = serde_json::to_writer_pretty(&mut out, &config)
            .map_err(anyhow::Error::from)
            .and_then(|_| writeln!(out).map_err(anyhow::Error::from));
        return match written {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => report(err, "-"),
        };
    }
    match commands::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => report(err, &config.output),
    }
}

/// Maps an error to its exit code and prints the one-line reason. An oracle
/// discrepancy also writes the full report, certificates included, to the
/// output target.
fn report(err: anyhow::Error, output: &str) -> ExitCode {
    let one_line = |s: String| s.replace('\n', " ");
    match err.downcast_ref::<Error>() {
        Some(Error::Discrepancy(found)) => {
            let json = serde_json::to_string_pretty(found).unwrap_or_default();
            let written = if output == "-" {
                println!("{json}");
                Ok(())
            } else {
                std::fs::write(output, json + "\n")
            };
            if let Err(io) = written {
                log::error!("could not write discrepancy report: {io}");
            }
            eprintln!("error[discrepancy]: {}", one_line(err.to_string()));
            ExitCode::from(EXIT_DISCREPANCY)
        }
        Some(Error::SizeGuard { .. }) => {
            eprintln!("error[size-guard]: {}", one_line(err.to_string()));
            ExitCode::from(EXIT_SIZE_GUARD)
        }
        Some(Error::Validation { .. } | Error::AxisCount(_)) => {
            eprintln!("error[validation]: {}", one_line(err.to_string()));
            ExitCode::from(EXIT_VALIDATION)
        }
        _ => {
            eprintln!("error[io]: {}", one_line(format!("{err:#}")));
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
