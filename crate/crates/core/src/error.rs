//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter violates its domain constraint.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam {
        field: &'static str,
        reason: String,
    },

    /// The assembled joint covariance is not positive semidefinite.
    #[error("model not PSD: 4x4 sub-block eigenvalue {eigenvalue:e} below -1e-10 * {max_eigenvalue:e}")]
    NotPsd {
        eigenvalue: f64,
        max_eigenvalue: f64,
    },

    /// Sample covariance has no positive eigenvalue on one side.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// More components requested than the whitened rank supports.
    #[error("insufficient rank: retained {retained}, requested {requested}")]
    InsufficientRank { retained: usize, requested: usize },

    /// Theorem-1 constants are undefined at rho = 0.
    #[error("degenerate: rho=0")]
    RhoZero,

    /// The alpha = 1 boundary has no established limit law.
    #[error("boundary alpha=1 unsupported")]
    AlphaBoundary,

    /// `alignment` requires unit vectors.
    #[error("non-unit input vector: norm {0}")]
    NonUnitVector(f64),

    /// The oracle mixture m1 or m2 has zero norm.
    #[error("zero-norm oracle vector {0}")]
    ZeroNormOracle(&'static str),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
