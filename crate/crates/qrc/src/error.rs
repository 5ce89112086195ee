//! Error types shared across the crate.

use thiserror::Error;

/// Unified error type for simulation, training, and I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    /// A Hilbert-space dimension below 1 was requested.
    #[error("invalid dimension {0}: qudit dimension must be at least 1")]
    InvalidDimension(usize),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A physical or configuration parameter violates its constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A state failed a density-matrix validity check.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A drive was evaluated outside its domain of definition.
    #[error("drive evaluated at t = {t}, outside [0, {span})")]
    DriveOutOfRange { t: f64, span: f64 },

    /// The adaptive integrator's step size underflowed.
    #[error("integrator step size underflow at t = {t}: system too stiff for the configured tolerances")]
    Stiffness { t: f64 },

    /// The integrated state became non-finite.
    #[error("state diverged (non-finite values) at t = {t}")]
    Divergence { t: f64 },

    /// The regularized normal equations are numerically singular.
    #[error("singular ridge system: condition estimate {cond:.3e} exceeds 1e14")]
    SingularSystem { cond: f64 },

    /// A metric was called with input it cannot process.
    #[error("invalid metric input: {0}")]
    InvalidMetricInput(String),

    /// Every regularization value in a sweep failed to solve.
    #[error("task failed: {0}")]
    TaskFailure(String),

    /// Every realization of a sweep failed.
    #[error("sweep failed: {0}")]
    SweepFailure(String),

    /// A configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    /// Requested plot-data kind does not match the result's contents.
    #[error("export mismatch: {0}")]
    ExportMismatch(String),

    /// Filesystem failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code category for the CLI: config 2, solver 3, ridge 4, i/o 5, other 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::InvalidDimension(_)
            | Error::DriveOutOfRange { .. } => 2,
            Error::Stiffness { .. } | Error::Divergence { .. } => 3,
            Error::SingularSystem { .. } | Error::TaskFailure(_) => 4,
            Error::Io { .. } => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
