//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("range parameters must be strictly positive and finite, got {0}")]
    InvalidRange(f64),

    #[error(
        "correlation matrix of order {order} is not positive definite at pivot {pivot} \
         even with jitter {max_jitter:e}"
    )]
    Factorization {
        order: usize,
        pivot: usize,
        max_jitter: f64,
    },

    #[error("factor extension to order {order} has non-positive Schur complement at max jitter")]
    SchurNotPositive { order: usize },

    #[error("insufficient data for marginalized predictive: have {have} points, need {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("basis Gram matrix is singular (collinear design)")]
    SingularBasis,

    #[error("particle degeneracy: no particle has finite positive weight")]
    ParticleDegeneracy,

    #[error("elliptical slice move failed to accept after {0} shrink steps")]
    EssStalled(usize),

    #[error("cross-validation fold {fold} failed: {source}")]
    LooFold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("candidate pool is empty")]
    EmptyPool,

    #[error("candidate pool has {pool} points but {needed} are needed")]
    PoolTooSmall { pool: usize, needed: usize },

    #[error("simulator returned non-finite output at {point:?}")]
    SimulatorNonFinite { point: Vec<f64> },

    #[error("point {point:?} lies outside the domain of `{name}`")]
    OutOfBounds { name: String, point: Vec<f64> },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("gridded truth format: {0}")]
    GridFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
