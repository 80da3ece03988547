use thiserror::Error;

use crate::lasserre::MomentVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed argument: out-of-range vertex ids, overlapping sets, bad bias profiles.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no convergence after {iterations} iterations (primal residual {primal:.3e}, dual residual {dual:.3e})")]
    Convergence {
        iterations: usize,
        primal: f64,
        dual: f64,
    },

    #[error("level too low: {0}")]
    Level(String),

    #[error("conditioning on an event of probability {0:.3e}")]
    DegenerateEvent(f64),

    /// Independence search ran out of budget; carries the least correlated candidate seen.
    #[error("no {alpha}-block independent conditioning found (best max block score {best_score:.4e})")]
    SearchFailure {
        alpha: f64,
        best_score: f64,
        best: Box<MomentVector>,
    },

    #[error("pipage rounding stalled: {0}")]
    Stall(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 2,
            Error::Capacity(_) => 3,
            Error::Convergence { .. } => 4,
            _ => 1,
        }
    }
}
