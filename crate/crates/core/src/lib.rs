//! Multi-layer sparse matrix factorization.
//!
//! A matrix `X` is approximated by `λ·S₁S₂…S_Q` with every `Sⱼ` sparse. The
//! [`palm`] module holds the block proximal-gradient solver, [`hierarchy`]
//! builds factorizations one split at a time, [`dictlearn`] applies that to
//! dictionary learning and [`transforms`] supplies Hadamard ground truth.

mod error;

pub mod constraints;
pub mod dictlearn;
pub mod hierarchy;
pub mod matcore;
pub mod palm;
pub mod rng;
pub mod transforms;

pub use constraints::{ConstraintKind, ConstraintSet};
pub use error::{Error, Result};
pub use hierarchy::{
    hierarchical_factorize, hierarchical_factorize_with, FactorizationReport, Side, SplitSchedule,
    SplitSets,
};
pub use matcore::{DenseMatrix, DimChain, MultiLayerOperator, SparseMatrix};
pub use palm::{palm4led, PalmConfig, PalmState};
