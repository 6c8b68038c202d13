//! `oneshot`: smoothed one-shot measures, theorem checks and protocol runs.
//!
//! Exit codes: 0 pass, 1 a checked inequality failed, 2 invalid input,
//! 3 numerical failure.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "oneshot",
    version,
    about = "One-shot information measures smoothed with a pinned marginal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct Output {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Test hook: shifts every asserted slack down by this amount.
#[derive(Args)]
pub struct Hook {
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub corrupt_bound: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MeasureKind {
    ImaxPartial,
    HminPartial,
    ImaxFull,
    HminFull,
    /// Information spectrum `I_s^eps(X;Y)`.
    Is,
    /// Conditional spectrum `H_s^eps(X|Y)`.
    Hs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum QuantumKindArg {
    /// `D_max(rho || sigma)`; needs `--sigma`.
    Dmax,
    Imax,
    Hmin,
    ImaxPartial,
    HminPartial,
    ImaxFull,
    HminFull,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MetricArg {
    #[value(name = "P")]
    P,
    #[value(name = "T")]
    T,
}

#[derive(Subcommand)]
enum Command {
    /// Classical smoothed measure of a distribution `{"shape": [nx, ny], "weights": [...]}`.
    Measure {
        #[arg(long, value_enum)]
        kind: MeasureKind,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Quantum measure of a state `{"dim", "dims", "re", "im"}`.
    Qmeasure {
        #[arg(long, value_enum)]
        kind: QuantumKindArg,
        #[arg(long, value_enum, default_value = "P")]
        metric: MetricArg,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        input: PathBuf,
        /// Reference operator for `dmax`.
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Exact `D_s^eps(P^n || Q^n)/n` against the Gaussian expansion.
    SecondOrder {
        #[arg(long)]
        input: PathBuf,
        /// Reference distribution; defaults to the product of the marginals.
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        /// Block lengths, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Classical state splitting with exact error, optionally sampled.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Monte-Carlo trials of the protocol loop.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the per-trial transcript in JSON output.
        #[arg(long)]
        transcript: bool,
        #[command(flatten)]
        out: Output,
        #[command(flatten)]
        hook: Hook,
    },
    /// Privacy amplification by Toeplitz hashing, exact over all seeds.
    Pa {
        #[arg(long)]
        input: PathBuf,
        /// Expected input bits; `|X|` must equal `2^n`.
        #[arg(long)]
        n: Option<u32>,
        /// Fixed key length.
        #[arg(long, conflicts_with = "converse")]
        ell: Option<u32>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Sweep every key length and check the converse.
        #[arg(long)]
        converse: bool,
        #[command(flatten)]
        out: Output,
        #[command(flatten)]
        hook: Hook,
    },
    /// Random-instance checks of the spectrum sandwich and partial/full equivalence.
    Thmcheck {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        nx: usize,
        #[arg(long, default_value_t = 3)]
        ny: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Defaults to `eps / 2`.
        #[arg(long)]
        delta: Option<f64>,
        /// Random two-qubit states for the quantum equivalence check.
        #[arg(long, default_value_t = 0)]
        quantum_trials: usize,
        #[command(flatten)]
        out: Output,
        #[command(flatten)]
        hook: Hook,
    },
}

/// Result of a command that ran to completion.
pub enum Outcome {
    Pass,
    CheckFailed,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<oneshot_core::Error> for CliError {
    fn from(e: oneshot_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Measure {
            kind,
            eps,
            input,
            out,
        } => commands::measure(kind, eps, &input, &out),
        Command::Qmeasure {
            kind,
            metric,
            eps,
            input,
            sigma,
            out,
        } => commands::qmeasure(kind, metric, eps, &input, sigma.as_deref(), &out),
        Command::SecondOrder {
            input,
            q,
            eps,
            n,
            out,
        } => commands::second_order(&input, q.as_deref(), eps, &n, &out),
        Command::Split {
            input,
            eps,
            delta,
            trials,
            seed,
            transcript,
            out,
            hook,
        } => commands::split(&input, eps, delta, trials, seed, transcript, &out, &hook),
        Command::Pa {
            input,
            n,
            ell,
            eps,
            delta,
            converse,
            out,
            hook,
        } => commands::pa(&input, n, ell, eps, delta, converse, &out, &hook),
        Command::Thmcheck {
            trials,
            seed,
            nx,
            ny,
            eps,
            delta,
            quantum_trials,
            out,
            hook,
        } => {
            let cfg = commands::ThmcheckConfig {
                trials,
                seed,
                nx,
                ny,
                eps,
                delta: delta.unwrap_or(eps / 2.0),
                quantum_trials,
            };
            commands::thmcheck(&cfg, &out, &hook)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => {
            eprintln!("check failed: an asserted inequality has negative slack");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
