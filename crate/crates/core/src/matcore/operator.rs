use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use super::sparse::SparseMatrix;
use crate::error::{dim_err, Error, Result};

/// Chained dimensions `a₁ … a_{Q+1}` of a factor product; factor `j` is
/// `a_j x a_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimChain(Vec<usize>);

impl DimChain {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidArgument(
                "a dimension chain needs at least two entries".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "dimension chain entries must be >= 1".into(),
            ));
        }
        Ok(Self(dims))
    }

    /// Square chain of `factors` factors of size `n x n`.
    pub fn square(n: usize, factors: usize) -> Result<Self> {
        Self::new(vec![n; factors + 1])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn num_factors(&self) -> usize {
        self.0.len() - 1
    }

    pub fn factor_shape(&self, j: usize) -> (usize, usize) {
        (self.0[j], self.0[j + 1])
    }
}

/// The scaled product `λ · S₁ S₂ ⋯ S_Q` of sparse factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator")]
pub struct MultiLayerOperator {
    scale: f64,
    factors: Vec<SparseMatrix>,
}

#[derive(Deserialize)]
struct RawOperator {
    scale: f64,
    factors: Vec<SparseMatrix>,
}

impl TryFrom<RawOperator> for MultiLayerOperator {
    type Error = Error;

    fn try_from(raw: RawOperator) -> Result<Self> {
        MultiLayerOperator::new(raw.scale, raw.factors)
    }
}

pub(crate) fn check_chain(factors: &[SparseMatrix]) -> Result<()> {
    for (k, w) in factors.windows(2).enumerate() {
        if w[0].cols() != w[1].rows() {
            return Err(dim_err(format!(
                "factor {k} is {}x{} but factor {} is {}x{}",
                w[0].rows(),
                w[0].cols(),
                k + 1,
                w[1].rows(),
                w[1].cols()
            )));
        }
    }
    Ok(())
}

impl MultiLayerOperator {
    pub fn new(scale: f64, factors: Vec<SparseMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "operator needs at least one factor".into(),
            ));
        }
        if !scale.is_finite() {
            return Err(Error::InvalidArgument(
                "operator scale must be finite".into(),
            ));
        }
        check_chain(&factors)?;
        Ok(Self { scale, factors })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn factors(&self) -> &[SparseMatrix] {
        &self.factors
    }

    pub fn into_parts(self) -> (f64, Vec<SparseMatrix>) {
        (self.scale, self.factors)
    }

    pub fn rows(&self) -> usize {
        self.factors[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.factors[self.factors.len() - 1].cols()
    }

    pub fn dim_chain(&self) -> DimChain {
        let mut dims: Vec<usize> = self.factors.iter().map(SparseMatrix::rows).collect();
        dims.push(self.cols());
        DimChain(dims)
    }

    pub fn total_nnz(&self) -> usize {
        self.factors.iter().map(SparseMatrix::nnz).sum()
    }

    /// `λ · S₁(S₂(⋯(S_Q v)))`, one sparse matvec per factor.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply_counted(v)?.0)
    }

    /// Like [`apply`](Self::apply), also returning the multiply-adds spent in
    /// the factor matvecs. The final scaling by λ is skipped when λ = 1 and is
    /// not counted.
    pub fn apply_counted(&self, v: &[f64]) -> Result<(Vec<f64>, usize)> {
        if v.len() != self.cols() {
            return Err(dim_err(format!(
                "vector of length {} against operator with {} columns",
                v.len(),
                self.cols()
            )));
        }
        let mut count = 0;
        let mut cur = v.to_vec();
        for f in self.factors.iter().rev() {
            let (next, c) = f.matvec_counted(&cur)?;
            count += c;
            cur = next;
        }
        if self.scale != 1.0 {
            cur.iter_mut().for_each(|x| *x *= self.scale);
        }
        Ok((cur, count))
    }

    /// `λ · Sᵀ_Q(⋯(Sᵀ₁ v))`.
    pub fn apply_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows() {
            return Err(dim_err(format!(
                "vector of length {} against transposed operator with {} rows",
                v.len(),
                self.rows()
            )));
        }
        let mut cur = v.to_vec();
        for f in &self.factors {
            cur = f.matvec_t(&cur)?;
        }
        cur.iter_mut().for_each(|x| *x *= self.scale);
        Ok(cur)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        product_dense(&self.factors).scaled(self.scale)
    }

    /// Relative complexity of the first `dictionary_factors` factors:
    /// `Σ nnz(Sⱼ) / (d·a)`, where `d x a` is the shape of their product.
    pub fn relative_complexity(&self, dictionary_factors: usize) -> Result<f64> {
        if dictionary_factors == 0 || dictionary_factors > self.factors.len() {
            return Err(Error::InvalidArgument(format!(
                "dictionary prefix {dictionary_factors} out of range for {} factors",
                self.factors.len()
            )));
        }
        relative_complexity(&self.factors[..dictionary_factors])
    }
}

/// `Σ nnz(Sⱼ) / (d·a)` for a dictionary given as a chain of factors.
pub fn relative_complexity(factors: &[SparseMatrix]) -> Result<f64> {
    let (first, last) = match (factors.first(), factors.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InvalidArgument("empty factor list".into())),
    };
    check_chain(factors)?;
    let nnz: usize = factors.iter().map(SparseMatrix::nnz).sum();
    Ok(nnz as f64 / (first.rows() * last.cols()) as f64)
}

/// Dense product of a non-empty factor chain, accumulated right to left.
pub(crate) fn product_dense(factors: &[SparseMatrix]) -> DenseMatrix {
    let (last, rest) = factors.split_last().expect("non-empty factor chain");
    rest.iter().rev().fold(last.to_dense(), |acc, f| {
        f.mul_dense(&acc).expect("chain validated")
    })
}
