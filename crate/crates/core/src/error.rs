use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma function pole at nonpositive integer {0}")]
    Pole(f64),

    #[error("quadrature did not converge: value {value:e}, error estimate {error_estimate:e} (tolerance {tolerance:e})")]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        tolerance: f64,
    },

    #[error("potential is not admissible: {0}")]
    ClassMembership(String),

    #[error("potential is not finite at node x = {x}")]
    SingularPotential { x: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    EigenConvergence { iterations: usize },

    #[error("no antisymmetric eigenpair among the {computed} computed pairs")]
    NotFound { computed: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("witness recursion did not terminate within {cap} steps: {reason}")]
    TerminationFailure { cap: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
