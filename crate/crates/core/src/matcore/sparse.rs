use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use crate::error::{dim_err, Error, Result};

/// Coordinate-format sparse matrix.
///
/// Triplets are kept sorted by `(row, col)` with no duplicate positions and no
/// stored zeros, so iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSparse")]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

#[derive(Deserialize)]
struct RawSparse {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl TryFrom<RawSparse> for SparseMatrix {
    type Error = Error;

    fn try_from(raw: RawSparse) -> Result<Self> {
        SparseMatrix::from_triplets(raw.rows, raw.cols, raw.triplets)
    }
}

impl SparseMatrix {
    /// Sorts the triplets and drops explicit zeros. Duplicate positions,
    /// out-of-range indices and non-finite values are rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::InvalidMatrix(format!(
                    "index ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!(
                    "non-finite value at ({r}, {c})"
                )));
            }
        }
        triplets.retain(|t| t.2 != 0.0);
        triplets.sort_by_key(|a| (a.0, a.1));
        if let Some(w) = triplets
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::InvalidMatrix(format!(
                "duplicate entry at ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self {
            rows,
            cols,
            triplets,
        })
    }

    /// Triplets already sorted, unique and non-zero.
    pub(crate) fn from_sorted_unchecked(
        rows: usize,
        cols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        debug_assert!(triplets
            .windows(2)
            .all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        debug_assert!(triplets.iter().all(|t| t.2 != 0.0));
        Self {
            rows,
            cols,
            triplets,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            triplets: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    pub fn eye(rows: usize, cols: usize) -> Self {
        let triplets = (0..rows.min(cols)).map(|i| (i, i, 1.0)).collect();
        Self {
            rows,
            cols,
            triplets,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let cols = m.cols();
        let triplets = m
            .data()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(idx, v)| (idx / cols, idx % cols, *v))
            .collect();
        Self {
            rows: m.rows(),
            cols,
            triplets,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.triplets {
            m.set(r, c, v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    #[inline]
    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.triplets
            .binary_search_by(|t| (t.0, t.1).cmp(&(r, c)))
            .map_or(0.0, |i| self.triplets[i].2)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.triplets.iter().map(|t| t.2 * t.2).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> Self {
        let mut triplets: Vec<_> = self.triplets.iter().map(|&(r, c, v)| (c, r, v)).collect();
        triplets.sort_by_key(|a| (a.0, a.1));
        Self {
            rows: self.cols,
            cols: self.rows,
            triplets,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self::zeros(self.rows, self.cols);
        }
        let triplets = self
            .triplets
            .iter()
            .map(|&(r, c, v)| (r, c, v * factor))
            .filter(|t| t.2 != 0.0)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            triplets,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.matvec_counted(x)?.0)
    }

    /// Sparse matvec that also reports the number of multiply-adds performed
    /// (one per stored entry).
    pub fn matvec_counted(&self, x: &[f64]) -> Result<(Vec<f64>, usize)> {
        if x.len() != self.cols {
            return Err(dim_err(format!(
                "vector of length {} against {}x{} sparse matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
        }
        Ok((y, self.triplets.len()))
    }

    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(dim_err(format!(
                "vector of length {} against transposed {}x{} sparse matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut y = vec![0.0; self.cols];
        for &(r, c, v) in &self.triplets {
            y[c] += v * x[r];
        }
        Ok(y)
    }

    /// `self · rhs` with a dense right-hand side.
    pub fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows() {
            return Err(dim_err(format!(
                "sparse {}x{} times dense {}x{}",
                self.rows,
                self.cols,
                rhs.rows(),
                rhs.cols()
            )));
        }
        let n = rhs.cols();
        let mut out = DenseMatrix::zeros(self.rows, n);
        let buf = out.data_mut();
        for &(r, c, v) in &self.triplets {
            let src = rhs.row(c);
            for (o, s) in buf[r * n..(r + 1) * n].iter_mut().zip(src) {
                *o += v * s;
            }
        }
        Ok(out)
    }

    /// `lhs · self` with a dense left-hand side.
    pub fn dense_mul(lhs: &DenseMatrix, sp: &SparseMatrix) -> Result<DenseMatrix> {
        if lhs.cols() != sp.rows {
            return Err(dim_err(format!(
                "dense {}x{} times sparse {}x{}",
                lhs.rows(),
                lhs.cols(),
                sp.rows,
                sp.cols
            )));
        }
        let m = lhs.rows();
        let n = sp.cols;
        let k = lhs.cols();
        let mut out = DenseMatrix::zeros(m, n);
        let src = lhs.data();
        let buf = out.data_mut();
        for &(r, c, v) in &sp.triplets {
            for i in 0..m {
                buf[i * n + c] += src[i * k + r] * v;
            }
        }
        Ok(out)
    }

    /// Sparse-sparse product, accumulated densely then re-sparsified.
    pub fn mul_sparse(&self, rhs: &SparseMatrix) -> Result<SparseMatrix> {
        Ok(SparseMatrix::from_dense(&self.mul_dense(&rhs.to_dense())?))
    }
}
