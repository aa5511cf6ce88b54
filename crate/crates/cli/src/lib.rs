//! Command-line driver: graph generation, single-trajectory runs,
//! enumeration, refits and pump sweeps, each writing a JSON manifest next to
//! its outputs.

pub mod args;
pub mod config;
mod commands;
mod output;

use clap::Parser;
use thiserror::Error;

pub use commands::{cmd_enumerate, cmd_fit, cmd_generate_graph, cmd_simulate, cmd_sweep_pump};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] ising_traj::Error),
    /// A run finished but some of its results are unusable.
    #[error("{0}")]
    Numerical(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot encode JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ising_traj::Error as E;
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Core(E::InfeasibleRates { .. }) => EXIT_INFEASIBLE,
            CliError::Core(E::Blowup { .. } | E::Aborted { .. } | E::InsufficientData { .. } | E::NoThermalFit { .. })
            | CliError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

/// Parses `argv` (including the program name), expanding any run file, and
/// runs the selected command.
pub fn run(argv: Vec<String>) -> Result<(), CliError> {
    let argv = config::expand_config(argv)?;
    let cli = args::Cli::try_parse_from(&argv)?;
    let recorded: Vec<String> = argv.into_iter().skip(1).collect();
    match cli.command {
        args::Command::GenerateGraph(a) => cmd_generate_graph(&a),
        args::Command::Simulate(a) => cmd_simulate(&a, &recorded),
        args::Command::Enumerate(a) => cmd_enumerate(&a),
        args::Command::Fit(a) => cmd_fit(&a),
        args::Command::SweepPump(a) => cmd_sweep_pump(&a, &recorded),
    }
}
