//! Matrix types, the multi-layer operator `λ·∏Sⱼ`, and norms/metrics.

mod dense;
pub mod io;
mod norms;
mod operator;
pub mod solve;
mod sparse;

pub use dense::DenseMatrix;
pub use norms::{
    frobenius_inner, frobenius_norm, rmse, spectral_norm, spectral_norm_default, LinearOp,
    SpectralEstimate, DEFAULT_SPECTRAL_MAX_ITER, DEFAULT_SPECTRAL_TOL,
};
pub(crate) use operator::{check_chain, product_dense};
pub use operator::{relative_complexity, DimChain, MultiLayerOperator};
pub use sparse::SparseMatrix;
