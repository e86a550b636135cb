//! Sylvester Hadamard matrices and their radix-2 butterfly factorization.

use crate::error::{Error, Result};
use crate::matcore::{DenseMatrix, MultiLayerOperator, SparseMatrix};

fn check_pow2(n: usize, min: usize) -> Result<u32> {
    if n < min || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "size must be a power of two >= {min}, got {n}"
        )));
    }
    Ok(n.trailing_zeros())
}

/// Sylvester Hadamard matrix: `H₁ = [1]`, `H₂ₙ = [[Hₙ, Hₙ], [Hₙ, −Hₙ]]`.
pub fn hadamard(n: usize) -> Result<DenseMatrix> {
    check_pow2(n, 1)?;
    // H[i][j] = (-1)^{popcount(i & j)}
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if (i & j).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }))
}

/// `log₂ n` sparse factors whose product is `hadamard(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyFactorization {
    pub n: usize,
    pub factors: Vec<SparseMatrix>,
}

impl ButterflyFactorization {
    pub fn operator(&self) -> MultiLayerOperator {
        MultiLayerOperator::new(1.0, self.factors.clone()).expect("square chain")
    }
}

/// The butterfly stage that applies `[[1, 1], [1, −1]]` to index pairs
/// `(i, i + stride)`.
pub fn butterfly_stage(n: usize, stride: usize) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(2 * n);
    for i in 0..n {
        if (i / stride).is_multiple_of(2) {
            triplets.push((i, i, 1.0));
            triplets.push((i, i + stride, 1.0));
        } else {
            triplets.push((i, i - stride, 1.0));
            triplets.push((i, i, -1.0));
        }
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("valid butterfly stage")
}

/// Factors ordered coarsest stride first: `n/2, n/4, …, 1`. Every factor has
/// two `±1` entries per row and per column.
pub fn hadamard_butterfly_factors(n: usize) -> Result<ButterflyFactorization> {
    let levels = check_pow2(n, 2)?;
    let factors = (0..levels)
        .map(|k| butterfly_stage(n, n >> (k + 1)))
        .collect();
    Ok(ButterflyFactorization { n, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_hadamards() {
        assert_eq!(hadamard(1).unwrap().data(), &[1.0]);
        assert_eq!(hadamard(2).unwrap().data(), &[1.0, 1.0, 1.0, -1.0]);
        let h4 = hadamard(4).unwrap();
        let h2 = hadamard(2).unwrap();
        // Sylvester block structure
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h4.get(i, j), h2.get(i, j));
                assert_eq!(h4.get(i + 2, j + 2), -h2.get(i, j));
            }
        }
        assert!(hadamard(3).is_err());
        assert!(hadamard(0).is_err());
    }

    #[test]
    fn n2_factorization_is_single_block() {
        let b = hadamard_butterfly_factors(2).unwrap();
        assert_eq!(b.factors.len(), 1);
        assert_eq!(b.factors[0].to_dense(), hadamard(2).unwrap());
        assert!(hadamard_butterfly_factors(1).is_err());
        assert!(hadamard_butterfly_factors(12).is_err());
    }

    #[test]
    fn stage_structure() {
        let s = butterfly_stage(8, 2);
        assert_eq!(s.nnz(), 16);
        let d = s.to_dense();
        for i in 0..8 {
            assert_eq!(d.row(i).iter().filter(|v| **v != 0.0).count(), 2);
            assert_eq!(d.column(i).iter().filter(|v| **v != 0.0).count(), 2);
        }
    }
}
