//! Hierarchical factorization: peel one sparse factor at a time off the
//! residual with a two-factor solve, then re-optimize every factor found so
//! far against the data.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{dim_err, Error, Result};
use crate::matcore::{rmse, DenseMatrix, MultiLayerOperator, SparseMatrix};
use crate::palm::{objective, palm4led, PalmConfig, PalmState};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Which end of the product factors are peeled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "left")]
    FromLeft,
    #[serde(rename = "right")]
    FromRight,
}

/// Constraint sets for one split: `factor` is the peeled sparse factor,
/// `residual` the remaining, denser one. Shapes are given in the orientation
/// of the input matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSets {
    pub factor: ConstraintSet,
    pub residual: ConstraintSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSchedule {
    pub side: Side,
    pub splits: Vec<SplitSets>,
}

impl SplitSchedule {
    pub fn new(side: Side, splits: Vec<SplitSets>) -> Result<Self> {
        if splits.is_empty() {
            return Err(Error::InvalidArgument(
                "schedule needs at least one split".into(),
            ));
        }
        let s = Self { side, splits };
        s.check_chain()?;
        Ok(s)
    }

    /// Total factor count `Q`.
    pub fn num_factors(&self) -> usize {
        self.splits.len() + 1
    }

    fn check_chain(&self) -> Result<()> {
        let left = self.to_left();
        let first = left.splits[0].residual.shape().1;
        for (k, s) in left.splits.iter().enumerate() {
            let (fr, fc) = s.factor.shape();
            let (rr, rc) = s.residual.shape();
            if fc != rr || rc != first {
                return Err(dim_err(format!(
                    "split {k}: factor {fr}x{fc} and residual {rr}x{rc} do not chain"
                )));
            }
            if k > 0 && left.splits[k - 1].residual.shape().0 != fr {
                return Err(dim_err(format!(
                    "split {k}: factor has {fr} rows, previous residual had {}",
                    left.splits[k - 1].residual.shape().0
                )));
            }
        }
        Ok(())
    }

    /// Shape of the matrix this schedule factorizes.
    pub fn target_shape(&self) -> (usize, usize) {
        let left = self.to_left();
        let rows = left.splits[0].factor.shape().0;
        let cols = left.splits[0].residual.shape().1;
        match self.side {
            Side::FromLeft => (rows, cols),
            Side::FromRight => (cols, rows),
        }
    }

    /// The equivalent left-peeling schedule on the transposed problem (or
    /// `self` when already left-peeling).
    fn to_left(&self) -> SplitSchedule {
        match self.side {
            Side::FromLeft => self.clone(),
            Side::FromRight => SplitSchedule {
                side: Side::FromLeft,
                splits: self
                    .splits
                    .iter()
                    .map(|s| SplitSets {
                        factor: s.factor.transpose(),
                        residual: s.residual.transpose(),
                    })
                    .collect(),
            },
        }
    }

    /// Constraint set of each final factor, in product order.
    pub fn final_sets(&self) -> Vec<ConstraintSet> {
        let mut sets: Vec<ConstraintSet> = self.splits.iter().map(|s| s.factor).collect();
        sets.push(self.splits[self.splits.len() - 1].residual);
        if self.side == Side::FromRight {
            sets.reverse();
        }
        sets
    }

    /// `Σ max_nnz(𝓔ⱼ) / (d·a)` over the first `dictionary_factors` final factors.
    pub fn rc_bound(&self, dictionary_factors: usize) -> f64 {
        let sets = self.final_sets();
        let dict = &sets[..dictionary_factors.min(sets.len())];
        let nnz: usize = dict.iter().map(ConstraintSet::max_nnz).sum();
        let d = dict[0].shape().0;
        let a = dict[dict.len() - 1].shape().1;
        nnz as f64 / (d * a) as f64
    }
}

/// Customization points, called in the left-peeling frame. For a
/// [`Side::FromRight`] schedule every matrix handed to a hook is transposed.
pub trait HierarchyHooks {
    /// Supplies the two-factor split at step `k` instead of the solver.
    fn split(
        &mut self,
        _k: usize,
        _residual: &DenseMatrix,
        _sets: &SplitSets,
        _config: &PalmConfig,
    ) -> Option<Result<PalmState>> {
        None
    }

    /// Runs after the global step at split `k`; may modify the iterate.
    fn after_global(&mut self, _k: usize, _x: &DenseMatrix, _state: &mut PalmState) -> Result<()> {
        Ok(())
    }
}

/// No customization.
pub struct NoHooks;

impl HierarchyHooks for NoHooks {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalStep {
    /// Objective of the warm start handed to the global solve.
    pub initial_objective: f64,
    pub trace: Vec<f64>,
    /// Objective after the `after_global` hook.
    pub final_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub format_version: u32,
    pub operator: MultiLayerOperator,
    pub rmse: f64,
    pub rc: f64,
    /// Leading factors counted in `rc`.
    pub dictionary_factors: usize,
    pub split_traces: Vec<Vec<f64>>,
    pub global_steps: Vec<GlobalStep>,
    pub seed: Option<u64>,
    pub config: PalmConfig,
    pub schedule: SplitSchedule,
    pub notes: Vec<String>,
    pub wall_ms: f64,
}

impl FactorizationReport {
    pub fn relative_error(&self, x: &DenseMatrix) -> Result<f64> {
        let approx = self.operator.to_dense();
        let diff = x.sub(&approx)?;
        let num = crate::matcore::frobenius_norm(&diff);
        let den = crate::matcore::frobenius_norm(x);
        Ok(if den == 0.0 { num } else { num / den })
    }
}

pub fn hierarchical_factorize(
    x: &DenseMatrix,
    schedule: &SplitSchedule,
    config: &PalmConfig,
) -> Result<FactorizationReport> {
    hierarchical_factorize_with(x, schedule, config, &mut NoHooks)
}

pub fn hierarchical_factorize_with(
    x: &DenseMatrix,
    schedule: &SplitSchedule,
    config: &PalmConfig,
    hooks: &mut dyn HierarchyHooks,
) -> Result<FactorizationReport> {
    config.validate()?;
    if schedule.target_shape() != x.shape() {
        let (r, c) = schedule.target_shape();
        return Err(dim_err(format!(
            "schedule factorizes {r}x{c} matrices, input is {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let started = Instant::now();
    let working_schedule = schedule.to_left();
    let (scale, factors, split_traces, global_steps) = match schedule.side {
        Side::FromLeft => factorize_left(x, &working_schedule, config, hooks)?,
        Side::FromRight => {
            let (scale, factors, st, gs) =
                factorize_left(&x.transpose(), &working_schedule, config, hooks)?;
            let factors = factors.iter().rev().map(SparseMatrix::transpose).collect();
            (scale, factors, st, gs)
        }
    };
    let operator = MultiLayerOperator::new(scale, factors)?;
    let dictionary_factors = operator.factors().len();
    let rmse = rmse(x, &operator.to_dense())?;
    let rc = operator.relative_complexity(dictionary_factors)?;
    Ok(FactorizationReport {
        format_version: REPORT_FORMAT_VERSION,
        operator,
        rmse,
        rc,
        dictionary_factors,
        split_traces,
        global_steps,
        seed: None,
        config: *config,
        schedule: schedule.clone(),
        notes: Vec::new(),
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

type LeftResult = (f64, Vec<SparseMatrix>, Vec<Vec<f64>>, Vec<GlobalStep>);

/// Truncated identity for the factor; the residual, cropped or zero-padded to
/// the residual set's shape, for the other side.
fn split_init(residual: &DenseMatrix, sets: &SplitSets) -> Result<PalmState> {
    let (r, c) = sets.factor.shape();
    let left = sets.factor.project(&DenseMatrix::eye(r, c))?;
    let (rr, rc) = sets.residual.shape();
    let fitted = if residual.shape() == (rr, rc) {
        residual.clone()
    } else {
        DenseMatrix::from_fn(rr, rc, |i, j| {
            if i < residual.rows() {
                residual.get(i, j)
            } else {
                0.0
            }
        })
    };
    let right = sets.residual.project(&fitted)?;
    Ok(PalmState::new(vec![left, right], 1.0))
}

fn factorize_left(
    x: &DenseMatrix,
    schedule: &SplitSchedule,
    config: &PalmConfig,
    hooks: &mut dyn HierarchyHooks,
) -> Result<LeftResult> {
    let mut factors: Vec<SparseMatrix> = Vec::new();
    let mut factor_sets: Vec<ConstraintSet> = Vec::new();
    let mut scale = 1.0;
    let mut residual = x.clone();
    let mut residual_factor: Option<SparseMatrix> = None;
    let mut split_traces = Vec::new();
    let mut global_steps = Vec::new();

    for (k, sets) in schedule.splits.iter().enumerate() {
        let split = match hooks.split(k, &residual, sets, config) {
            Some(res) => res?,
            None => palm4led(
                &residual,
                &[sets.factor, sets.residual],
                split_init(&residual, sets)?,
                config,
            )?,
        };
        split_traces.push(split.objective_trace.clone());
        let mut parts = split.factors.into_iter();
        let (t1, t2) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::InvalidArgument(
                    "split must yield exactly two factors".into(),
                ))
            }
        };

        factors.push(t1);
        factor_sets.push(sets.factor);
        let mut chain = factors.clone();
        chain.push(t2);
        let warm = PalmState::new(chain, scale * split.scale);
        let initial_objective = objective(x, &warm.factors, warm.scale)?;

        let mut state = if k == 0 {
            // the first split already solved this exact problem
            PalmState {
                objective_trace: Vec::new(),
                ..warm
            }
        } else {
            let mut all_sets = factor_sets.clone();
            all_sets.push(sets.residual);
            palm4led(x, &all_sets, warm, config)?
        };
        let trace = std::mem::take(&mut state.objective_trace);
        hooks.after_global(k, x, &mut state)?;
        let final_objective = objective(x, &state.factors, state.scale)?;
        global_steps.push(GlobalStep {
            initial_objective,
            trace,
            final_objective,
        });

        scale = state.scale;
        let mut f = state.factors;
        let r = f.pop().expect("k + 2 factors");
        residual = r.to_dense();
        residual_factor = Some(r);
        factors = f;
    }
    factors.push(residual_factor.expect("at least one split"));
    Ok((scale, factors, split_traces, global_steps))
}

/// Schedule that recovers the butterfly structure of `hadamard(n)`: every
/// peeled factor keeps 2 entries per row and column (`2n` in total), the
/// residual after split `k` keeps `n/2ᵏ` per row and column (`n²/2ᵏ`).
///
/// Global top-`p` sets with the same totals stall on this input: the entries
/// of `hadamard(n)` all tie in magnitude and the first split settles on the
/// leading rows.
pub fn hadamard_schedule(n: usize) -> Result<SplitSchedule> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "hadamard schedule needs a power of two >= 4, got {n}"
        )));
    }
    let q = n.trailing_zeros() as usize;
    let splits = (1..q)
        .map(|k| {
            Ok(SplitSets {
                factor: ConstraintSet::splincol(2, n, n)?,
                residual: ConstraintSet::splincol(n >> k, n, n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SplitSchedule::new(Side::FromLeft, splits)
}

/// Solver settings for [`hadamard_schedule`]. Convergence there is linear and
/// fast, so the stopping tolerance is tight enough to reach round-off.
pub fn hadamard_config() -> PalmConfig {
    PalmConfig {
        obj_tol: 1e-12,
        ..PalmConfig::default()
    }
}

/// Right-peeling schedule for learning a `d x d` dictionary as `Q − 1` sparse
/// factors plus a coefficient matrix (`d x n`, at most 5 non-zeros per
/// column).
///
/// Intermediate factors keep `d·p` entries (`p` per column on average); the
/// residual after split `k ≥ 2` keeps `⌈P / 2^{k−2}⌉`.
pub fn build_experiment_schedule(
    d: usize,
    n: usize,
    q: usize,
    p: usize,
    big_p: usize,
) -> Result<SplitSchedule> {
    build_experiment_schedule_with(d, n, q, p, big_p, 5)
}

pub fn residual_budget(big_p: usize, k: usize) -> usize {
    debug_assert!(k >= 2);
    big_p.div_ceil(1 << (k - 2))
}

pub fn build_experiment_schedule_with(
    d: usize,
    n: usize,
    q: usize,
    p: usize,
    big_p: usize,
    coeff_sparsity: usize,
) -> Result<SplitSchedule> {
    if q < 3 {
        return Err(Error::InvalidArgument(format!(
            "need Q >= 3 factors, got {q}"
        )));
    }
    if p == 0 || big_p == 0 || coeff_sparsity == 0 {
        return Err(Error::InvalidArgument(
            "sparsity budgets must be >= 1".into(),
        ));
    }
    let full = d * d;
    let mut splits = vec![SplitSets {
        factor: ConstraintSet::spcol(coeff_sparsity, d, n)?,
        residual: ConstraintSet::sp(full, d, d)?,
    }];
    for k in 2..q {
        splits.push(SplitSets {
            factor: ConstraintSet::sp((d * p).min(full), d, d)?,
            residual: ConstraintSet::sp(residual_budget(big_p, k).min(full), d, d)?,
        });
    }
    SplitSchedule::new(Side::FromRight, splits)
}
