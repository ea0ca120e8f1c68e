use thiserror::Error;

/// Errors surfaced by oracles, bound computations, and readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    InvalidDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weight function is identically zero; Z = 0 has no log bound")]
    ZeroWeight,

    #[error("dimension {n} exceeds the cap {cap} for exact computation")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The drawn perturbations put the estimator outside the regime where
    /// the closed-form bound is valid; the caller should redraw.
    #[error("slack bound violated ({context}); resample the perturbation")]
    DegenerateDraw { context: &'static str },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("formula is unsatisfiable")]
    Unsat,

    #[error("solver output did not report an optimum")]
    UnknownResult,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
