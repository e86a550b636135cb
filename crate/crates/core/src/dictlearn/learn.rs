//! Learning a multi-layer sparse dictionary from training data.
//!
//! The hierarchy peels factors from the right: the first split separates the
//! coefficients `Γ` (at most 5 non-zeros per column) from a dense dictionary,
//! each later split peels a sparse factor off that dictionary. After every
//! global step `Γ` is recomputed by OMP against the current dictionary.
//!
//! The first split is not a PALM solve. It starts from `d` distinct data
//! columns as atoms, codes the data with OMP, refits the dictionary by least
//! squares and codes once more.

use rand::seq::index;

use super::omp::{encode_all, Atoms};
use crate::constraints::ConstraintSet;
use crate::error::{dim_err, Error, Result};
use crate::hierarchy::{
    build_experiment_schedule_with, hierarchical_factorize_with, FactorizationReport,
    HierarchyHooks, SplitSets,
};
use crate::matcore::{rmse, solve::least_squares, DenseMatrix, SparseMatrix};
use crate::palm::{PalmConfig, PalmState};
use crate::rng::{stream, Rng};

pub const COEFF_SPARSITY: usize = 5;

/// Note attached to every learned report.
pub const FIRST_SPLIT_NOTE: &str =
    "first split: OMP coding against data-column atoms with one least-squares dictionary refit";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnParams {
    /// Total factor count, dictionary factors plus `Γ`.
    pub q: usize,
    /// Average non-zeros per column of intermediate factors.
    pub p: usize,
    /// Residual budget at the second split.
    pub big_p: usize,
    pub coeff_sparsity: usize,
}

impl LearnParams {
    pub fn new(q: usize, p: usize, big_p: usize) -> Self {
        Self {
            q,
            p,
            big_p,
            coeff_sparsity: COEFF_SPARSITY,
        }
    }
}

/// Columns of `m` scaled to unit norm. Zero columns are left alone.
fn normalize_columns(m: &DenseMatrix) -> DenseMatrix {
    let norms: Vec<f64> = (0..m.cols())
        .map(|j| m.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        if norms[j] > 0.0 {
            m.get(i, j) / norms[j]
        } else {
            0.0
        }
    })
}

/// `d` distinct non-zero columns of `x`, drawn with `rng`.
fn data_atoms(x: &DenseMatrix, d: usize, rng: &mut Rng) -> Result<DenseMatrix> {
    let nonzero: Vec<usize> = (0..x.cols())
        .filter(|&j| x.column(j).iter().any(|v| *v != 0.0))
        .collect();
    if nonzero.len() < d {
        return Err(Error::InvalidArgument(format!(
            "need {d} non-zero training columns, have {}",
            nonzero.len()
        )));
    }
    let picks: Vec<usize> = index::sample(rng, nonzero.len(), d)
        .into_iter()
        .map(|i| nonzero[i])
        .collect();
    Ok(normalize_columns(&DenseMatrix::from_fn(
        x.rows(),
        d,
        |i, j| x.get(i, picks[j]),
    )))
}

/// Least-squares refit of `D` in `X ≈ DΓ`, one row at a time. Atoms that no
/// column uses are replaced by fresh data columns.
fn refit_dictionary(x: &DenseMatrix, gamma: &SparseMatrix, rng: &mut Rng) -> Result<DenseMatrix> {
    let atoms = gamma.rows();
    let g = gamma.to_dense();
    let rows: Vec<&[f64]> = (0..atoms).map(|a| g.row(a)).collect();
    let mut d = DenseMatrix::zeros(x.rows(), atoms);
    let mut used = vec![false; atoms];
    gamma.triplets().iter().for_each(|t| used[t.0] = true);
    let active: Vec<&[f64]> = (0..atoms).filter(|&a| used[a]).map(|a| rows[a]).collect();
    let active_idx: Vec<usize> = (0..atoms).filter(|&a| used[a]).collect();
    for i in 0..x.rows() {
        let (coef, _) = least_squares(&active, x.row(i));
        for (&a, c) in active_idx.iter().zip(coef) {
            d.set(i, a, c);
        }
    }
    let unused: Vec<usize> = (0..atoms).filter(|&a| !used[a]).collect();
    if !unused.is_empty() {
        let fresh = data_atoms(x, unused.len(), rng)?;
        for (slot, &a) in unused.iter().enumerate() {
            for i in 0..x.rows() {
                d.set(i, a, fresh.get(i, slot));
            }
        }
    }
    Ok(normalize_columns(&d))
}

fn frobenius(m: &DenseMatrix) -> f64 {
    m.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Hooks that realize the learning strategy. All matrices arrive transposed
/// (the hierarchy runs left-peeling on `Xᵀ`), so `Γᵀ` is the first factor.
struct LearnHooks {
    d: usize,
    k: usize,
    rng: Rng,
    omp_refreshes: usize,
}

impl LearnHooks {
    fn first_split(&mut self, xt: &DenseMatrix, sets: &SplitSets) -> Result<PalmState> {
        let x = xt.transpose();
        let dict = data_atoms(&x, self.d, &mut self.rng)?;
        let gamma = encode_all(&Atoms::allowing_zero(&dict), &x, self.k)?.coefficients;
        let dict = refit_dictionary(&x, &gamma, &mut self.rng)?;
        let gamma = encode_all(&Atoms::allowing_zero(&dict), &x, self.k)?.coefficients;
        let norm = frobenius(&dict);
        if norm == 0.0 {
            return Err(Error::DegenerateProjection);
        }
        let residual = sets.residual.project(&dict.transpose())?;
        Ok(PalmState::new(vec![gamma.transpose(), residual], norm))
    }
}

impl HierarchyHooks for LearnHooks {
    fn split(
        &mut self,
        k: usize,
        residual: &DenseMatrix,
        sets: &SplitSets,
        _config: &PalmConfig,
    ) -> Option<Result<PalmState>> {
        (k == 0).then(|| self.first_split(residual, sets))
    }

    fn after_global(&mut self, k: usize, xt: &DenseMatrix, state: &mut PalmState) -> Result<()> {
        if k == 0 {
            // Γ is already the OMP code of this dictionary
            return Ok(());
        }
        let dict_t = crate::matcore::product_dense(&state.factors[1..]);
        let dict = dict_t.transpose().scaled(state.scale);
        let gamma = encode_all(&Atoms::allowing_zero(&dict), &xt.transpose(), self.k)?.coefficients;
        state.factors[0] = gamma.transpose();
        self.omp_refreshes += 1;
        Ok(())
    }
}

/// Learns `X ≈ λ·S₁⋯S_{Q−1}·Γ`. The report's RC counts the `Q − 1` dictionary
/// factors only.
pub fn proposed_learn(
    x: &DenseMatrix,
    params: LearnParams,
    config: &PalmConfig,
    seed: u64,
) -> Result<FactorizationReport> {
    let (d, n) = x.shape();
    if params.coeff_sparsity > d {
        return Err(dim_err(format!(
            "{} atoms per sample out of {d}",
            params.coeff_sparsity
        )));
    }
    let schedule = build_experiment_schedule_with(
        d,
        n,
        params.q,
        params.p,
        params.big_p,
        params.coeff_sparsity,
    )?;
    let mut hooks = LearnHooks {
        d,
        k: params.coeff_sparsity,
        rng: stream(seed, 2),
        omp_refreshes: 0,
    };
    let mut report = hierarchical_factorize_with(x, &schedule, config, &mut hooks)?;
    report.dictionary_factors = params.q - 1;
    report.rc = report.operator.relative_complexity(params.q - 1)?;
    report.seed = Some(seed);
    report.notes.push(FIRST_SPLIT_NOTE.to_string());
    report.notes.push(format!(
        "coefficients recomputed by OMP after {} global steps",
        hooks.omp_refreshes
    ));
    Ok(report)
}

/// RMSE of coding `x` with OMP in the true dictionary.
pub fn oracle_baseline_rmse(dict: &DenseMatrix, x: &DenseMatrix, k: usize) -> Result<f64> {
    let gamma = encode_all(&Atoms::new(dict)?, x, k)?.coefficients;
    rmse(x, &SparseMatrix::dense_mul(dict, &gamma)?)
}

/// The coefficient set `Γ` must satisfy.
pub fn coefficient_set(d: usize, n: usize, k: usize) -> Result<ConstraintSet> {
    ConstraintSet::spcol(k, d, n)
}
