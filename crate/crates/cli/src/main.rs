//! `qdice`: analytic tables and Monte Carlo experiments for the quantum dice.
//!
//! Exit codes: 0 when every check passes, 1 on a statistical or oracle
//! failure, 2 on a usage error.

mod commands;
mod render;

use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use quantum_dice::die::{DieState, RollDirection};

pub const SEED_ENV: &str = "QDICE_SEED";
const DEFAULT_SEED: u64 = 1;
const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(name = "qdice", version, about = "Quantum dice: Born rule, interference and CHSH violation with a macroscopic die")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the analytic Born table and the face observables.
    Probabilities,
    /// Roll a prepared die many times and compare with the Born rule.
    Roll(RollArgs),
    /// Decompose a marginal into sequential paths plus interference.
    Interference(InterferenceArgs),
    /// Run the CHSH experiment on the rod-connected pair.
    Bell(BellArgs),
    /// Check the hidden-impulse measure against the Born rule on every cell.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SessionArgs {
    /// Number of Monte Carlo trials.
    #[arg(long, default_value_t = DEFAULT_TRIALS, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    /// Seed of the random streams.
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Half-width of the acceptance interval, in standard errors.
    #[arg(long = "sigma", default_value_t = 3.0, value_parser = parse_positive)]
    pub sigma_level: f64,

    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub lanes: u64,
}

#[derive(Debug, Clone, Args)]
pub struct RollArgs {
    /// Prepared state: +z, -z, +x or -x.
    #[arg(long, allow_hyphen_values = true)]
    pub state: DieState,

    /// Roll direction: z or x.
    #[arg(long)]
    pub direction: RollDirection,

    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InterferenceArgs {
    /// Prepared state: +z, -z, +x or -x.
    #[arg(long, allow_hyphen_values = true)]
    pub state: DieState,

    /// Direction of the first (conditioning) roll.
    #[arg(long)]
    pub condition: RollDirection,

    /// Direction of the roll whose `+1` probability is decomposed.
    #[arg(long)]
    pub target: RollDirection,

    /// Monte Carlo trials; 0 prints the analytic decomposition only.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,

    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[arg(long = "sigma", default_value_t = 3.0, value_parser = parse_positive)]
    pub sigma_level: f64,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub lanes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Joint x-rolls create the correlation.
    Rolled,
    /// Players only read the faces already up.
    Discovery,
}

#[derive(Debug, Clone, Args)]
pub struct BellArgs {
    #[arg(long, value_enum, default_value_t = Variant::Rolled)]
    pub variant: Variant,

    /// Prepared state of die A (discovery variant).
    #[arg(long, allow_hyphen_values = true, default_value = "+x")]
    pub die_a: DieState,

    /// Prepared state of die B (discovery variant).
    #[arg(long, allow_hyphen_values = true, default_value = "-x")]
    pub die_b: DieState,

    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Number of λ grid points.
    #[arg(long, default_value_t = quantum_dice::oracle::GRID_POINTS, value_parser = clap::value_parser!(u32).range(1..))]
    pub grid: u32,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Where the seed came from, for the echo line in human output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Flag,
    Env,
    Default,
}

fn seed_source(matches: &clap::ArgMatches) -> SeedSource {
    let Some((_, sub)) = matches.subcommand() else {
        return SeedSource::Default;
    };
    if sub.try_get_raw("seed").is_err() {
        return SeedSource::Default;
    }
    match sub.value_source("seed") {
        Some(ValueSource::CommandLine) => SeedSource::Flag,
        Some(ValueSource::EnvVariable) => SeedSource::Env,
        _ => SeedSource::Default,
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => e.exit(),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let source = seed_source(&matches);

    match commands::execute(&cli, source) {
        Ok(out) => {
            print!("{}", out.text);
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
