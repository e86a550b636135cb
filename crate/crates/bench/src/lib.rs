//! Benchmark fixtures.

use palmfact_core::transforms::{hadamard, hadamard_butterfly_factors};
use palmfact_core::{ConstraintSet, DenseMatrix, MultiLayerOperator, PalmState, SparseMatrix};

/// Butterfly operator and the dense matrix it equals.
pub fn hadamard_pair(n: usize) -> (MultiLayerOperator, DenseMatrix) {
    let op = hadamard_butterfly_factors(n)
        .expect("power of two")
        .operator();
    (op, hadamard(n).expect("power of two"))
}

/// Deterministic vector with no zero entries.
pub fn probe_vector(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| ((i * 7919) % 1009) as f64 / 1009.0 + 0.1)
        .collect()
}

/// Hadamard target with one `splincol(2)` set per factor, started from identities.
pub fn hadamard_problem(n: usize) -> (DenseMatrix, Vec<ConstraintSet>, PalmState) {
    let q = n.trailing_zeros() as usize;
    let sets = (0..q)
        .map(|_| ConstraintSet::splincol(2, n, n).expect("valid set"))
        .collect();
    let init = PalmState::new(vec![SparseMatrix::identity(n); q], 1.0);
    (hadamard(n).expect("power of two"), sets, init)
}
