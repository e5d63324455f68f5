//! `qnd` — experiments and verification suites for the two-way quantum
//! number distribution simulator.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or config error.

mod attack_demo;
mod config;
mod manifest;
mod simulate;
mod sweep;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qnd",
    version,
    about = "Two-way quantum number distribution: simulator, attacks, and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepAxis {
    N,
    ErrorRate,
    Fraction,
    Distance,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-form-vs-expansion verification suites and print the
    /// maximum deviations; exits 1 on any deviation above 1e-12.
    Verify {
        /// Site dimensions for the qudit suite.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4, 5])]
        dims: Vec<usize>,
        /// Random parameter pairs per suite.
        #[arg(long, default_value_t = 100)]
        pairs: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run a full session from a JSON config and write the report files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare honest and attacked outcome tables side by side, with the
    /// attacker's recovered values for the intercept case.
    AttackDemo {
        #[arg(long, value_enum)]
        kind: attack_demo::DemoKind,
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Also write the comparison as JSON into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one axis and emit a table of recovery/discard/key statistics.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
        /// Explicit sweep points, comma separated.
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<f64>>,
        /// Range as start:stop:step (inclusive of stop within one step).
        #[arg(long)]
        range: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Session config used by the session-based axes.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { dims, pairs, seed } => verify::run(&dims, pairs, seed),
        Command::Simulate { config, seed, out } => simulate::run(&config, seed, &out),
        Command::AttackDemo {
            kind,
            fraction,
            seed,
            out,
        } => attack_demo::run(kind, fraction, seed, out.as_deref()),
        Command::Sweep {
            axis,
            points,
            range,
            seed,
            out,
            format,
            config,
        } => sweep::run(
            axis,
            points,
            range.as_deref(),
            seed,
            &out,
            format,
            config.as_deref(),
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
