use thiserror::Error;

use crate::mesh::MeshError;
use crate::problem::ProblemError;
use crate::scheme::SchemeError;
use crate::sparse::SolveError;

/// Top-level error for callers that mix modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("configuration: {0}")]
    Config(String),
    /// An experiment step failed; `stage` names it.
    #[error("{stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: SolveError,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
