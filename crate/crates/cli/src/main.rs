//! `tracking-game`: solve, verify and sweep the two-player tracking game.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, RunConfig, DEFAULT_SCENARIO};
use error::Result;

#[derive(Parser, Debug)]
#[command(name = "tracking-game", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Riccati coefficients, weights and urgency on the grid.
    Coeffs(Common),
    /// Equilibrium paths for one scenario (or an ensemble with --paths > 1).
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also write coeffs.csv.
        #[arg(long)]
        with_weights: bool,
        /// Also run the verification suite and embed it in summary.json.
        #[arg(long)]
        with_verification: bool,
    },
    /// Run every check; exit status 1 names the failing fields.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Verify this solution.json instead of solving afresh.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Random perturbations for the optimality checks.
        #[arg(long)]
        perturbations: Option<usize>,
    },
    /// Opponent phenomenology over a (γ, λ) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated permanent impact values.
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<f64>>,
        /// Comma-separated temporary impact values.
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Builtin scenario name or path to a scenario JSON file.
    #[arg(long)]
    scenario: Option<String>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated price paths for stochastic scenarios.
    #[arg(long)]
    paths: Option<usize>,
    /// Uniform intervals before the terminal tail.
    #[arg(long)]
    grid_uniform: Option<usize>,
    /// Geometric tail intervals.
    #[arg(long)]
    grid_tail: Option<usize>,
    /// Last node sits at T(1 - eps_frac).
    #[arg(long)]
    eps_frac: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let mut grid = file.grid;
        grid.n_uniform = self.grid_uniform.or(grid.n_uniform);
        grid.n_tail = self.grid_tail.or(grid.n_tail);
        grid.eps_frac = self.eps_frac.or(grid.eps_frac);
        Ok(RunConfig {
            scenario: self
                .scenario
                .clone()
                .or_else(|| file.scenario.clone())
                .unwrap_or_else(|| DEFAULT_SCENARIO.to_string()),
            grid,
            seed: self.seed.or(file.seed).unwrap_or(0),
            n_paths: self.paths.or(file.n_paths).unwrap_or(1),
            out: self.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| "out".into()),
            outputs: file.outputs.unwrap_or_default(),
            gammas: file.gammas.clone().unwrap_or_else(|| vec![0.1, 0.5, 1.0, 2.0]),
            lambdas: file.lambdas.clone().unwrap_or_else(|| vec![1.0]),
            perturbations: file.perturbations.unwrap_or(100),
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Coeffs(common) => commands::coeffs(&common.resolve()?),
        Command::Solve {
            common,
            with_weights,
            with_verification,
        } => {
            let mut cfg = common.resolve()?;
            cfg.outputs.weights |= with_weights;
            cfg.outputs.verification |= with_verification;
            commands::solve_cmd(&cfg)
        }
        Command::Verify {
            common,
            solution,
            perturbations,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = perturbations {
                cfg.perturbations = n;
            }
            commands::verify(&cfg, solution.as_deref())
        }
        Command::Sweep {
            common,
            gamma,
            lambda,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(g) = gamma {
                cfg.gammas = g;
            }
            if let Some(l) = lambda {
                cfg.lambdas = l;
            }
            commands::sweep(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
