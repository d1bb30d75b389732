//! Argument parsing and command dispatch for the `triplets` binary.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod correlate;
mod solve;
mod sweep;

use std::io::Write;

pub use args::{Cli, Command};
pub use solve::{FieldRow, FitReport, SolveReport, SolvedBranch};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error(transparent)]
    Core(#[from] triplet_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage and configuration problems, 3 when the query has no
    /// solution, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        use triplet_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::NoSolution(_) => 3,
            CliError::Core(e) => match e {
                E::Io(_) | E::TotalInternalReflection { .. } | E::NoConvergence(_) | E::ZeroVariance(_) => 1,
                _ => 2,
            },
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Solve(a) => solve::cmd_solve(a, out),
        Command::Cone(a) => solve::cmd_cone(a, out),
        Command::Sweep(a) => sweep::cmd_sweep(a, out),
        Command::Render(a) => sweep::cmd_render(a, out),
        Command::Simulate(a) => correlate::cmd_simulate(a, out),
        Command::Correlate(a) => correlate::cmd_correlate(a, out),
    }
}
