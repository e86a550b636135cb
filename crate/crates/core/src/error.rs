use thiserror::Error;

/// Errors produced by the factorization toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Hard-thresholding left nothing to normalize onto the unit sphere.
    #[error("degenerate projection: thresholded matrix is zero")]
    DegenerateProjection,

    /// `Tr(X̂ᵀX̂) = 0`, so the optimal scale is undefined.
    #[error("degenerate scale update: product of factors is zero")]
    DegenerateScale,

    /// A NaN or infinity appeared; `trace` holds the objectives recorded so far.
    #[error("non-finite value in iterate {iteration}, block {block}")]
    NonFinite {
        iteration: usize,
        block: usize,
        trace: Vec<f64>,
    },

    #[error("failed to draw a full-rank factor after {0} attempts")]
    RankRepair(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
