use thiserror::Error;

use crate::solver::SolverState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ellipticity violated: {0}")]
    EllipticityViolation(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("trace of mean strain is {found}, expected {expected}")]
    TraceViolation { found: f64, expected: f64 },

    #[error("coincident interpolation abscissae at {0:e}")]
    CoincidentNodes(f64),

    #[error("mean strain is not reachable by lamination: {0}")]
    NotReachable(String),

    #[error("period schedule not resolvable on the grid: {0}")]
    Unresolvable(String),

    #[error("relaxed phase field given where a sharp one is required")]
    RelaxedInput,

    #[error("phase field invalid: {0}")]
    InvalidPhase(String),

    #[error("input has nonzero trace (max |tr| = {0:e})")]
    NonzeroTrace(f64),

    #[error("singular acoustic tensor at k = {0:?}")]
    SingularAcoustic([f64; 3]),

    #[error("no convergence after {iterations} iterations (last increment {last_increment:e})")]
    NonConvergence {
        iterations: usize,
        last_increment: f64,
        state: Box<SolverState>,
    },

    #[error("non-finite value at iteration {iteration}: {what}")]
    NonFinite { iteration: usize, what: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field grid mismatch: {0}")]
    GridMismatch(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
