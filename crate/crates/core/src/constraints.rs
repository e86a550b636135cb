//! Constraint sets on individual factors and their Euclidean projections.
//!
//! For the unit-norm sparse set `{A : ‖vec A‖₀ ≤ p, ‖A‖_F = 1}` the projection
//! keeps the `p` largest-magnitude entries and rescales to unit Frobenius norm.
//! The column/row sparse sets keep the `k` largest entries of each
//! column/row and do not normalize. The row-and-column set keeps the union of
//! both selections and normalizes. Magnitude ties go to the smaller
//! `(row, col)` index.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{DenseMatrix, SparseMatrix};

/// Norms this close to one are left as-is, which makes projection idempotent
/// bit for bit.
const UNIT_NORM_SLACK: f64 = 64.0 * f64::EPSILON;
const FEASIBLE_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ConstraintKind {
    /// At most `p` non-zeros overall and unit Frobenius norm.
    #[serde(rename = "sp")]
    GlobalSparseUnitNorm { p: usize },
    /// At most `k` non-zeros in every column.
    #[serde(rename = "spcol")]
    ColumnSparse { k: usize },
    /// At most `k` non-zeros in every row; the transpose of `ColumnSparse`.
    #[serde(rename = "sprow")]
    RowSparse { k: usize },
    /// Union of the `k` largest entries of every row and of every column,
    /// rescaled to unit Frobenius norm. Not an exact Euclidean projection.
    #[serde(rename = "splincol")]
    RowColSparseUnitNorm { k: usize },
    #[serde(rename = "none")]
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct ConstraintSet {
    #[serde(flatten)]
    kind: ConstraintKind,
    shape: (usize, usize),
}

#[derive(Deserialize)]
struct RawSet {
    #[serde(flatten)]
    kind: ConstraintKind,
    shape: (usize, usize),
}

impl TryFrom<RawSet> for ConstraintSet {
    type Error = Error;
    fn try_from(raw: RawSet) -> Result<Self> {
        ConstraintSet::new(raw.kind, raw.shape.0, raw.shape.1)
    }
}

impl ConstraintSet {
    pub fn new(kind: ConstraintKind, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "constraint shape must be non-empty".into(),
            ));
        }
        let ok = match kind {
            ConstraintKind::GlobalSparseUnitNorm { p } => (1..=rows * cols).contains(&p),
            ConstraintKind::ColumnSparse { k } => (1..=rows).contains(&k),
            ConstraintKind::RowSparse { k } => (1..=cols).contains(&k),
            ConstraintKind::RowColSparseUnitNorm { k } => k >= 1 && k <= rows.max(cols),
            ConstraintKind::Unconstrained => true,
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "sparsity budget out of range for {kind:?} on {rows}x{cols}"
            )));
        }
        Ok(Self {
            kind,
            shape: (rows, cols),
        })
    }

    pub fn sp(p: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(ConstraintKind::GlobalSparseUnitNorm { p }, rows, cols)
    }

    pub fn spcol(k: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(ConstraintKind::ColumnSparse { k }, rows, cols)
    }

    pub fn sprow(k: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(ConstraintKind::RowSparse { k }, rows, cols)
    }

    pub fn splincol(k: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(ConstraintKind::RowColSparseUnitNorm { k }, rows, cols)
    }

    pub fn unconstrained(rows: usize, cols: usize) -> Self {
        Self {
            kind: ConstraintKind::Unconstrained,
            shape: (rows, cols),
        }
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    /// Same constraint on the transposed factor.
    pub fn transpose(&self) -> Self {
        let kind = match self.kind {
            ConstraintKind::ColumnSparse { k } => ConstraintKind::RowSparse { k },
            ConstraintKind::RowSparse { k } => ConstraintKind::ColumnSparse { k },
            other => other,
        };
        Self {
            kind,
            shape: (self.shape.1, self.shape.0),
        }
    }

    /// Upper bound on the number of non-zeros of any member.
    pub fn max_nnz(&self) -> usize {
        let (r, c) = self.shape;
        match self.kind {
            ConstraintKind::GlobalSparseUnitNorm { p } => p,
            ConstraintKind::ColumnSparse { k } => k * c,
            ConstraintKind::RowSparse { k } => k * r,
            ConstraintKind::RowColSparseUnitNorm { k } => (k * (r + c)).min(r * c),
            ConstraintKind::Unconstrained => r * c,
        }
    }

    fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if (rows, cols) != self.shape {
            return Err(dim_err(format!(
                "{rows}x{cols} matrix against constraint of shape {}x{}",
                self.shape.0, self.shape.1
            )));
        }
        Ok(())
    }

    /// Euclidean projection onto the set.
    ///
    /// Returns [`Error::DegenerateProjection`] when a unit-norm set receives a
    /// matrix whose thresholded part is zero.
    pub fn project(&self, a: &DenseMatrix) -> Result<SparseMatrix> {
        self.check_shape(a.rows(), a.cols())?;
        let (rows, cols) = self.shape;
        match self.kind {
            ConstraintKind::GlobalSparseUnitNorm { p } => {
                let data = a.data();
                let mut kept = top_k_indices(data.len(), p, |i| data[i]);
                kept.sort_unstable();
                unit_norm_support(a, &kept)
            }
            ConstraintKind::RowColSparseUnitNorm { k } => {
                let mut keep = vec![false; rows * cols];
                for i in 0..rows {
                    let row = a.row(i);
                    for j in top_k_indices(cols, k, |j| row[j]) {
                        keep[i * cols + j] = true;
                    }
                }
                for j in 0..cols {
                    for i in top_k_indices(rows, k, |i| a.get(i, j)) {
                        keep[i * cols + j] = true;
                    }
                }
                let kept: Vec<usize> = (0..rows * cols).filter(|&i| keep[i]).collect();
                unit_norm_support(a, &kept)
            }
            ConstraintKind::ColumnSparse { k } => {
                let mut triplets = Vec::with_capacity(k * cols);
                for j in 0..cols {
                    for i in top_k_indices(rows, k, |i| a.get(i, j)) {
                        triplets.push((i, j, a.get(i, j)));
                    }
                }
                triplets.sort_unstable_by_key(|x| (x.0, x.1));
                Ok(SparseMatrix::from_sorted_unchecked(rows, cols, triplets))
            }
            ConstraintKind::RowSparse { k } => {
                let mut triplets = Vec::with_capacity(k * rows);
                for i in 0..rows {
                    let row = a.row(i);
                    let mut kept = top_k_indices(cols, k, |j| row[j]);
                    kept.sort_unstable();
                    triplets.extend(kept.into_iter().map(|j| (i, j, row[j])));
                }
                Ok(SparseMatrix::from_sorted_unchecked(rows, cols, triplets))
            }
            ConstraintKind::Unconstrained => Ok(SparseMatrix::from_dense(a)),
        }
    }

    pub fn project_sparse(&self, a: &SparseMatrix) -> Result<SparseMatrix> {
        self.project(&a.to_dense())
    }

    /// Membership test; unit norm is checked within `1e-10`.
    pub fn is_feasible(&self, a: &SparseMatrix) -> bool {
        if a.shape() != self.shape {
            return false;
        }
        let (rows, cols) = self.shape;
        match self.kind {
            ConstraintKind::GlobalSparseUnitNorm { p } => {
                a.nnz() <= p && (a.frobenius_norm() - 1.0).abs() <= FEASIBLE_NORM_TOL
            }
            ConstraintKind::ColumnSparse { k } => {
                let mut counts = vec![0usize; cols];
                a.triplets().iter().for_each(|t| counts[t.1] += 1);
                counts.iter().all(|&c| c <= k)
            }
            ConstraintKind::RowSparse { k } => {
                let mut counts = vec![0usize; rows];
                a.triplets().iter().for_each(|t| counts[t.0] += 1);
                counts.iter().all(|&c| c <= k)
            }
            ConstraintKind::RowColSparseUnitNorm { .. } => {
                // feasible iff the selection rule keeps every stored entry
                (a.frobenius_norm() - 1.0).abs() <= FEASIBLE_NORM_TOL
                    && self
                        .project(&a.to_dense())
                        .is_ok_and(|p| p.nnz() == a.nnz())
            }
            ConstraintKind::Unconstrained => true,
        }
    }

    pub fn is_feasible_dense(&self, a: &DenseMatrix) -> bool {
        self.is_feasible(&SparseMatrix::from_dense(a))
    }
}

/// `a` restricted to the sorted flat indices `kept`, rescaled to unit norm.
fn unit_norm_support(a: &DenseMatrix, kept: &[usize]) -> Result<SparseMatrix> {
    let (rows, cols) = a.shape();
    let data = a.data();
    let norm = kept.iter().map(|&i| data[i] * data[i]).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateProjection);
    }
    let inv = if (norm - 1.0).abs() <= UNIT_NORM_SLACK {
        1.0
    } else {
        norm.recip()
    };
    let triplets = kept
        .iter()
        .filter_map(|&i| {
            let v = if inv == 1.0 { data[i] } else { data[i] * inv };
            (v != 0.0).then_some((i / cols, i % cols, v))
        })
        .collect();
    Ok(SparseMatrix::from_sorted_unchecked(rows, cols, triplets))
}

/// Indices of the (at most) `k` non-zero entries of largest magnitude among
/// `0..n`, ties broken toward the smaller index. Order of the result is
/// unspecified.
fn top_k_indices(n: usize, k: usize, value: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).filter(|&i| value(i) != 0.0).collect();
    if idx.len() > k {
        let order = |a: &usize, b: &usize| -> Ordering {
            value(*b)
                .abs()
                .partial_cmp(&value(*a).abs())
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(b))
        };
        idx.select_nth_unstable_by(k - 1, order);
        idx.truncate(k);
    }
    idx
}
