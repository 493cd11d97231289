mod check;
mod error;
mod figure;
mod fit;
mod io;
mod limit;
mod simulate;
mod summary;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, Result};

/// Adaptive LASSO in cointegrating regressions: simulation, limit laws and plots.
#[derive(Debug, Parser)]
#[command(name = "alasso", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "ALASSO_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment plan.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample a limit law and estimate selection probabilities.
    Limit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render density plots from the output of `simulate`.
    Figure {
        /// Directory written by `simulate`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Only the cell with this sample size.
        #[arg(long)]
        t: Option<usize>,
        /// Only the cell with this tuning label (e.g. c1, p0.5, T).
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, default_value_t = 1)]
        coord: usize,
        #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
        xmin: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        xmax: f64,
    },
    /// Run the invariant suite and print a pass/fail table.
    Check {
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        draws: usize,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
    },
    /// Fit the adaptive LASSO to a CSV dataset (columns y, x1, x2, ...).
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        lag: bool,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate { config, out, seed } => simulate::run(&config, &out, seed),
        Command::Limit { config, out, seed } => limit::run(&config, &out, seed),
        Command::Figure {
            input,
            out,
            t,
            rule,
            coord,
            xmin,
            xmax,
        } => figure::run(&figure::FigureArgs {
            input: &input,
            out: &out,
            t,
            rule: rule.as_deref(),
            coord,
            xlim: (xmin, xmax),
        }),
        Command::Check { seed, draws, steps } => check::run(seed, draws, steps),
        Command::Fit {
            data,
            lambda,
            gamma,
            lag,
            max_iter,
            out,
        } => fit::run(&fit::FitArgs {
            data: &data,
            lambda,
            gamma,
            lag,
            max_iter,
            out: out.as_deref(),
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
