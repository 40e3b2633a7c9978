//! Command-line driver for the spin-bath qubit model.

// `!(x <= tol)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use spinbath::SpectrumPath;
use thiserror::Error;

use crate::config::RunConfig;
use crate::verify::{Case, VerifyOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] spinbath::Error),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(spinbath::Error::Capacity { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Enumerate,
    Hamming,
    Auto,
}

impl From<ModeArg> for SpectrumPath {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Enumerate => SpectrumPath::Enumerate,
            ModeArg::Hamming => SpectrumPath::Hamming,
            ModeArg::Auto => SpectrumPath::Auto,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinbath", version, about = "Exact reduced dynamics of a driven qubit in a spin bath")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Bath spectrum construction, overriding the config.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,

    /// Seed for the verification suite.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Print per-size maxima in the verification report.
    #[arg(long, global = true)]
    pub tol_report: bool,

    /// Scale every Riccati eigenvalue by this factor (negative control).
    #[arg(long, global = true, hide = true)]
    pub corrupt_riccati: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Bath modes, weights and Riccati eigenvalues.
    Spectrum,
    /// Reduced density matrix along the time grid.
    Evolve,
    /// Adiabatic fidelity, closed form and via the channel.
    Fidelity,
    /// Coherence |η₀₁(t)| along the time grid.
    Coherence,
    /// Compare against the full-space oracles.
    Verify,
    /// Fidelity curves over a parameter grid.
    Sweep,
}

/// What a successful run produced.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    /// Verification verdict; always true for other commands.
    pub passed: bool,
    pub path: Option<PathBuf>,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => return Err(CliError::Config("--config is required".into())),
    };
    let path = match cli.mode {
        Some(m) => m.into(),
        None => cfg.mode()?,
    };
    let out = match &cli.output {
        Some(p) => Some(p.clone()),
        None => cfg.output_path()?,
    };
    let table = |text: String| Ok(Outcome { text, passed: true, path: out.clone() });
    match cli.command {
        Command::Spectrum => table(commands::spectrum(&cfg, path)?),
        Command::Evolve => table(commands::evolve_table(&cfg, path)?),
        Command::Coherence => table(commands::coherence_table(&cfg, path)?),
        Command::Fidelity => table(commands::fidelity_table(&cfg, path)?),
        Command::Sweep => table(commands::sweep_table(&cfg, path)?),
        Command::Verify => {
            let mut opts = VerifyOptions::from_section(&cfg.verify());
            if let Some(seed) = cli.seed {
                opts.seed = seed;
            }
            opts.corrupt_riccati = cli.corrupt_riccati;
            let mut extra = Vec::new();
            if cfg.has_model() {
                let params = cfg.params()?;
                verify_capacity(params.n())?;
                let rho0 = match cfg.raw().initial_state {
                    Some(_) => cfg.initial_state()?,
                    None => spinbath::DensityMatrix2::from_bloch([0.6, 0.0, 0.8])?,
                };
                let times = match cfg.raw().time {
                    Some(_) => cfg.times()?,
                    None => config::time_grid(0.0, opts.t_max, opts.times)?,
                };
                if times.iter().any(|t| *t < 0.0) {
                    return Err(CliError::Config("verification times must be non-negative".into()));
                }
                extra.push(Case { label: "config".into(), params, rho0, times });
            }
            let report = verify::run(&opts, &extra)?;
            Ok(Outcome { text: report.render(cli.tol_report), passed: report.passed(), path: out })
        }
    }
}

fn verify_capacity(n: usize) -> Result<(), CliError> {
    if n > verify::VERIFY_N_MAX {
        return Err(spinbath::Error::Capacity { n, max: verify::VERIFY_N_MAX }.into());
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("spinbath: {e}");
            return e.exit_code();
        }
    };
    let written = match &outcome.path {
        Some(p) => std::fs::write(p, &outcome.text),
        None => std::io::stdout().lock().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("spinbath: {}", CliError::Output(e));
        return 2;
    }
    if outcome.passed {
        0
    } else {
        1
    }
}
