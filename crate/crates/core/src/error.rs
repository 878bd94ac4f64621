//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by kernel, estimator, schedule, band, and simulation
/// operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid bandwidth {0}: must be positive and finite")]
    InvalidBandwidth(f64),

    #[error("bandwidth {0} must be < 1 so that log(1/h) > 0")]
    BandwidthNotSubunit(f64),

    #[error("quadrature did not converge (residual error estimate {0:e})")]
    QuadratureNonConvergence(f64),

    #[error("integral of squared kernel derivative undefined: {0}")]
    DerivSquareUndefined(String),

    #[error("parameter {name}={value} outside required range {requirement}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        requirement: String,
    },

    #[error("rate sequence evaluation requires n >= 3, got {0}")]
    RateEvalBelowMinimum(u64),

    #[error("invalid rate sequence: {0}")]
    InvalidRateSequence(String),

    #[error("schedule invalid: {0}")]
    InvalidSchedule(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty sample")]
    EmptySample,

    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("density estimate is zero everywhere; sup-truncated band undefined")]
    AllZeroEstimate,

    #[error("band construction failed: {0}")]
    BandConstruction(String),

    #[error("band family precondition violated: {0}")]
    FamilyPrecondition(String),

    #[error("simulation failed at n={n}, replication {replication}: {source}")]
    Replication {
        n: u64,
        replication: u32,
        source: Box<Error>,
    },

    #[error("log-level fit needs at least 2 points with positive miss estimates, found {0}")]
    InsufficientFitPoints(usize),

    #[error("unknown {kind} name '{name}'")]
    UnknownName { kind: &'static str, name: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
