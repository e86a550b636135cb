//! Orthogonal matching pursuit.
//!
//! Each step picks the atom with the largest normalized correlation
//! `|⟨dⱼ, r⟩| / ‖dⱼ‖` against the current residual, then re-fits all selected
//! coefficients by least squares, which keeps the residual orthogonal to the
//! selected atoms.

use crate::error::{dim_err, Error, Result};
use crate::matcore::{solve::least_squares, DenseMatrix, SparseMatrix};

/// Residuals this small relative to the signal end the pursuit early.
const EXACT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct OmpCode {
    /// Selected atoms in selection order with their coefficients.
    pub coefficients: Vec<(usize, f64)>,
    pub residual_norm: f64,
    /// A selected atom was numerically dependent on earlier ones; its
    /// coefficient is zero.
    pub rank_deficient: bool,
}

impl OmpCode {
    pub fn support(&self) -> Vec<usize> {
        self.coefficients.iter().map(|c| c.0).collect()
    }

    pub fn dense(&self, atoms: usize) -> Vec<f64> {
        let mut v = vec![0.0; atoms];
        for &(j, c) in &self.coefficients {
            v[j] = c;
        }
        v
    }
}

/// Sparse codes for all columns of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OmpResult {
    /// `atoms x n`, at most `k` non-zeros per column.
    pub coefficients: SparseMatrix,
    pub residual_norms: Vec<f64>,
    pub rank_deficient_columns: usize,
}

/// Column-major view of a dictionary with cached atom norms.
pub struct Atoms {
    rows: usize,
    columns: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl Atoms {
    pub fn new(dict: &DenseMatrix) -> Result<Self> {
        let atoms = Self::allowing_zero(dict);
        if atoms.norms.contains(&0.0) {
            return Err(Error::InvalidArgument("dictionary has a zero atom".into()));
        }
        Ok(atoms)
    }

    /// Like [`Atoms::new`], but zero atoms are kept and never selected.
    pub fn allowing_zero(dict: &DenseMatrix) -> Self {
        let columns: Vec<Vec<f64>> = (0..dict.cols()).map(|j| dict.column(j)).collect();
        let norms: Vec<f64> = columns
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Self {
            rows: dict.rows(),
            columns,
            norms,
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn encode(&self, x: &[f64], k: usize) -> Result<OmpCode> {
        if x.len() != self.rows {
            return Err(dim_err(format!(
                "signal of length {} against dictionary with {} rows",
                x.len(),
                self.rows
            )));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("OMP needs k >= 1".into()));
        }
        let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut residual = x.to_vec();
        let mut res_norm = x_norm;
        let mut support: Vec<usize> = Vec::new();
        let mut coef: Vec<f64> = Vec::new();
        let mut deficient = false;
        let steps = k.min(self.len()).min(self.rows);
        while support.len() < steps && res_norm > EXACT_TOL * x_norm.max(f64::MIN_POSITIVE) {
            let mut best: Option<(usize, f64)> = None;
            for (j, col) in self.columns.iter().enumerate() {
                if self.norms[j] == 0.0 || support.contains(&j) {
                    continue;
                }
                let corr = col
                    .iter()
                    .zip(&residual)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .abs()
                    / self.norms[j];
                if best.is_none_or(|(_, b)| corr > b) {
                    best = Some((j, corr));
                }
            }
            let Some((j, corr)) = best else { break };
            if corr == 0.0 {
                break;
            }
            support.push(j);
            let cols: Vec<&[f64]> = support
                .iter()
                .map(|&s| self.columns[s].as_slice())
                .collect();
            let (c, def) = least_squares(&cols, x);
            deficient |= def;
            coef = c;
            residual = x.to_vec();
            for (&s, &cv) in support.iter().zip(&coef) {
                for (r, a) in residual.iter_mut().zip(&self.columns[s]) {
                    *r -= cv * a;
                }
            }
            res_norm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        }
        Ok(OmpCode {
            coefficients: support.into_iter().zip(coef).collect(),
            residual_norm: res_norm,
            rank_deficient: deficient,
        })
    }
}

/// Sparse code of one signal with at most `k` atoms.
pub fn omp(dict: &DenseMatrix, x: &[f64], k: usize) -> Result<OmpCode> {
    Atoms::new(dict)?.encode(x, k)
}

/// Codes every column of `x` independently.
pub fn omp_matrix(dict: &DenseMatrix, x: &DenseMatrix, k: usize) -> Result<OmpResult> {
    if dict.rows() != x.rows() {
        return Err(dim_err(format!(
            "dictionary has {} rows, data has {}",
            dict.rows(),
            x.rows()
        )));
    }
    encode_all(&Atoms::new(dict)?, x, k)
}

/// Codes every column of `x` against prepared atoms.
pub fn encode_all(atoms: &Atoms, x: &DenseMatrix, k: usize) -> Result<OmpResult> {
    if atoms.rows != x.rows() {
        return Err(dim_err(format!(
            "dictionary has {} rows, data has {}",
            atoms.rows,
            x.rows()
        )));
    }
    let mut triplets = Vec::with_capacity(k * x.cols());
    let mut residual_norms = Vec::with_capacity(x.cols());
    let mut deficient = 0;
    for col in 0..x.cols() {
        let code = atoms.encode(&x.column(col), k)?;
        triplets.extend(code.coefficients.iter().map(|&(j, c)| (j, col, c)));
        residual_norms.push(code.residual_norm);
        deficient += usize::from(code.rank_deficient);
    }
    Ok(OmpResult {
        coefficients: SparseMatrix::from_triplets(atoms.len(), x.cols(), triplets)?,
        residual_norms,
        rank_deficient_columns: deficient,
    })
}
