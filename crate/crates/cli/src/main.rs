//! `catsim`: simulations, oracle checks, classification and plot data for
//! catastrophe chains.

mod config;
mod diagnose;
mod error;
mod neuts;
mod output;
mod regime;
mod simulate;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "catsim", version, about = "Binomial catastrophe chains in a random environment")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one trajectory and write it as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exact-oracle suite on a matrix of small configurations.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the regime of a configuration as JSON.
    Classify {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Emit the (a, β) phase diagram of the log-tail example as CSV.
    Phase {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        a_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        beta_grid: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupling and gap-law checks for Neuts' model.
    Neuts {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write one Neuts trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Recurrence diagnostics for the three regimes of the example.
    Diagnose {
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV of the partial-sum series.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            horizon,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig::load(Some(&config))?;
            simulate::run(&cfg, horizon, seed, out, cli.format)
        }
        Command::Validate { config } => validate::run(&ExperimentConfig::load(config.as_deref())?),
        Command::Classify { a, beta, config } => regime::classify(&ExperimentConfig::load(config.as_deref())?, a, beta),
        Command::Phase {
            config,
            a_grid,
            beta_grid,
            out,
        } => regime::phase(&ExperimentConfig::load(config.as_deref())?, a_grid, beta_grid, out),
        Command::Neuts { config, trajectory } => neuts::run(&ExperimentConfig::load(config.as_deref())?, trajectory),
        Command::Diagnose { config, out } => {
            diagnose::run(&ExperimentConfig::load(config.as_deref())?, out, cli.format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("config error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
