//! Case-file driven runs of the plate solver: single solves, load sweeps,
//! Jacobian benchmarks and grid-convergence studies, each writing CSV.

pub mod case;
pub mod output;
pub mod runner;

use dqplate::NewtonReport;

pub use case::CaseFile;
pub use runner::{run_bench, run_case, run_convergence, run_sweep, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid case file.
    #[error("invalid case file: {0}")]
    Input(String),

    #[error("{context}: Newton iteration did not converge\n{report}")]
    NotConverged {
        context: String,
        report: Box<NewtonReport>,
    },

    #[error(transparent)]
    Solver(#[from] dqplate::Error),

    #[error("output error: {0}")]
    Output(String),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::NotConverged { .. } | CliError::Solver(dqplate::Error::Diverged { .. }) => 3,
            CliError::Solver(_) | CliError::Output(_) | CliError::Failed(_) => 1,
        }
    }
}
