//! Proximal alternating linearized minimization over the factors of
//! `½‖X − λ·S₁⋯S_Q‖²_F` subject to `Sⱼ ∈ 𝓔ⱼ`.
//!
//! Each outer iteration sweeps the factors left to right. Factor `j` takes a
//! projected gradient step
//!
//! ```text
//! Sⱼ ← P_𝓔ⱼ(Sⱼ − (1/c)·λLᵀ(λLSⱼR − X)Rᵀ),   c = (1 + margin)·λ²‖L‖₂²‖R‖₂²
//! ```
//!
//! where `L` is the product of the already-updated factors to the left and
//! `R` the product of the not-yet-updated factors to the right. The sweep ends
//! with the closed-form scale update `λ = ⟨X, X̂⟩ / ⟨X̂, X̂⟩`.
//!
//! The smooth term is a polynomial in the factors, hence smooth and
//! semi-algebraic; the constraint sets are closed semi-algebraic sets, so
//! their indicators are proper and lower semi-continuous. The block gradient
//! is globally Lipschitz with modulus `λ²‖L‖₂²‖R‖₂²`, and the step size is
//! chosen strictly above it. Under those conditions each update satisfies the
//! sufficient-decrease inequality, so the objective is non-increasing once all
//! factors are feasible.

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    check_chain, frobenius_inner, product_dense, spectral_norm, DenseMatrix, MultiLayerOperator,
    SparseMatrix, DEFAULT_SPECTRAL_MAX_ITER,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PalmConfig {
    pub max_iter: usize,
    /// Stop when the RMSE changes by less than this between iterations.
    pub obj_tol: f64,
    /// Step constant is `(1 + step_margin)` times the Lipschitz modulus.
    pub step_margin: f64,
    pub spectral_tol: f64,
    /// Floor on the Lipschitz modulus.
    pub min_modulus: f64,
}

impl Default for PalmConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            obj_tol: 1e-6,
            step_margin: 1e-3,
            spectral_tol: 1e-7,
            min_modulus: 1e-12,
        }
    }
}

impl PalmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.obj_tol,
            self.step_margin,
            self.spectral_tol,
            self.min_modulus,
        ];
        if self.max_iter == 0 || positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "invalid PALM configuration {self:?}"
            )));
        }
        Ok(())
    }
}

/// Iterate of the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalmState {
    pub factors: Vec<SparseMatrix>,
    pub scale: f64,
    pub iteration: usize,
    /// `½‖X − λ∏S‖²_F` after each completed outer iteration.
    pub objective_trace: Vec<f64>,
}

impl PalmState {
    pub fn new(factors: Vec<SparseMatrix>, scale: f64) -> Self {
        Self {
            factors,
            scale,
            iteration: 0,
            objective_trace: Vec::new(),
        }
    }

    /// Truncated identities projected onto each set, with `λ = 1`.
    pub fn identity_init(sets: &[ConstraintSet]) -> Result<Self> {
        let factors = sets
            .iter()
            .map(|s| {
                let (r, c) = s.shape();
                s.project(&DenseMatrix::eye(r, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(factors, 1.0))
    }

    pub fn operator(&self) -> Result<MultiLayerOperator> {
        MultiLayerOperator::new(self.scale, self.factors.clone())
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }
}

/// Which block an observed update touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Factor(usize),
    Scale,
}

/// Smooth objective right after a single block update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEvent {
    pub iteration: usize,
    pub block: Block,
    pub objective: f64,
}

fn check_target(x: &DenseMatrix, factors: &[SparseMatrix]) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one factor is required".into(),
        ));
    }
    check_chain(factors)?;
    let rows = factors[0].rows();
    let cols = factors[factors.len() - 1].cols();
    if (rows, cols) != x.shape() {
        return Err(dim_err(format!(
            "factor chain is {rows}x{cols} but X is {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn half_sq_dist(x: &DenseMatrix, scale: f64, prod: &DenseMatrix) -> f64 {
    0.5 * x
        .data()
        .iter()
        .zip(prod.data())
        .map(|(a, b)| {
            let d = a - scale * b;
            d * d
        })
        .sum::<f64>()
}

/// `½‖X − λ·∏Sⱼ‖²_F`.
pub fn objective(x: &DenseMatrix, factors: &[SparseMatrix], scale: f64) -> Result<f64> {
    check_target(x, factors)?;
    Ok(half_sq_dist(x, scale, &product_dense(factors)))
}

fn mul_left(left: Option<&DenseMatrix>, s: &SparseMatrix) -> Result<DenseMatrix> {
    match left {
        Some(l) => SparseMatrix::dense_mul(l, s),
        None => Ok(s.to_dense()),
    }
}

/// `L·S·R`, with `None` standing for an identity.
fn sandwich(
    left: Option<&DenseMatrix>,
    s: &SparseMatrix,
    right: Option<&DenseMatrix>,
) -> Result<DenseMatrix> {
    match (left, right) {
        (None, Some(r)) => s.mul_dense(r),
        (l, Some(r)) => mul_left(l, s)?.matmul(r),
        (l, None) => mul_left(l, s),
    }
}

/// Gradient of `½‖X − λLSR‖²_F` with respect to `S`: `λLᵀ(λLSR − X)Rᵀ`.
///
/// `left`/`right` of `None` stand for identities.
pub fn gradient_factor(
    x: &DenseMatrix,
    left: Option<&DenseMatrix>,
    s: &SparseMatrix,
    right: Option<&DenseMatrix>,
    scale: f64,
) -> Result<DenseMatrix> {
    Ok(gradient_and_residual(x, left, s, right, scale)?.0)
}

/// Returns the gradient together with `½‖λLSR − X‖²_F`.
fn gradient_and_residual(
    x: &DenseMatrix,
    left: Option<&DenseMatrix>,
    s: &SparseMatrix,
    right: Option<&DenseMatrix>,
    scale: f64,
) -> Result<(DenseMatrix, f64)> {
    let prod = sandwich(left, s, right)?;
    if prod.shape() != x.shape() {
        return Err(dim_err(format!(
            "L·S·R is {}x{} but X is {}x{}",
            prod.rows(),
            prod.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let mut resid = prod;
    for (e, xv) in resid.data_mut().iter_mut().zip(x.data()) {
        *e = scale * *e - xv;
    }
    let half_sq = 0.5 * resid.data().iter().map(|v| v * v).sum::<f64>();
    let t = match right {
        Some(r) => resid.gemm(false, r, true)?,
        None => resid,
    };
    let g = match left {
        Some(l) => l.gemm(true, &t, false)?,
        None => t,
    };
    Ok((g.scaled(scale), half_sq))
}

fn op_norm(m: Option<&DenseMatrix>, tol: f64) -> f64 {
    let Some(m) = m else { return 1.0 };
    let (r, c) = m.shape();
    // for very oblong matrices iterate on the small Gram matrix instead
    let gram = if r >= 4 * c {
        m.gemm(true, m, false).ok()
    } else if c >= 4 * r {
        m.gemm(false, m, true).ok()
    } else {
        None
    };
    match gram {
        Some(g) => spectral_norm(&g, tol, DEFAULT_SPECTRAL_MAX_ITER)
            .value
            .sqrt(),
        None => spectral_norm(m, tol, DEFAULT_SPECTRAL_MAX_ITER).value,
    }
}

/// `λ²‖R‖₂²‖L‖₂²`, floored at `min_modulus`.
pub fn lipschitz_modulus(
    left: Option<&DenseMatrix>,
    right: Option<&DenseMatrix>,
    scale: f64,
    spectral_tol: f64,
    min_modulus: f64,
) -> f64 {
    let l = op_norm(left, spectral_tol);
    let r = op_norm(right, spectral_tol);
    (scale * scale * l * l * r * r).max(min_modulus)
}

/// One projected gradient step on a factor. A degenerate projection keeps
/// the current factor.
pub fn update_factor(
    x: &DenseMatrix,
    left: Option<&DenseMatrix>,
    right: Option<&DenseMatrix>,
    current: &SparseMatrix,
    scale: f64,
    set: &ConstraintSet,
    config: &PalmConfig,
) -> Result<SparseMatrix> {
    let grad = gradient_factor(x, left, current, right, scale)?;
    step_and_project(left, right, current, &grad, scale, set, config)
}

fn step_and_project(
    left: Option<&DenseMatrix>,
    right: Option<&DenseMatrix>,
    current: &SparseMatrix,
    grad: &DenseMatrix,
    scale: f64,
    set: &ConstraintSet,
    config: &PalmConfig,
) -> Result<SparseMatrix> {
    let modulus = lipschitz_modulus(left, right, scale, config.spectral_tol, config.min_modulus);
    step_with_modulus(current, grad, modulus, set, config)
}

fn step_with_modulus(
    current: &SparseMatrix,
    grad: &DenseMatrix,
    modulus: f64,
    set: &ConstraintSet,
    config: &PalmConfig,
) -> Result<SparseMatrix> {
    let step = 1.0 / ((1.0 + config.step_margin) * modulus);
    let mut moved = current.to_dense();
    for (m, g) in moved.data_mut().iter_mut().zip(grad.data()) {
        *m -= step * g;
    }
    match set.project(&moved) {
        Ok(s) => Ok(s),
        Err(Error::DegenerateProjection) => Ok(current.clone()),
        Err(e) => Err(e),
    }
}

/// The left product `L` as seen by the sweep. When `L` has many more rows
/// than columns only `LᵀL` and `LᵀX` are kept, which is all the gradient and
/// the step size need.
enum Left {
    Identity,
    Dense(DenseMatrix),
    Gram {
        gram: DenseMatrix,
        cross: DenseMatrix,
    },
}

impl Left {
    /// `‖L‖₂²`.
    fn sq_norm(&self, tol: f64) -> f64 {
        match self {
            Left::Identity => 1.0,
            Left::Dense(l) => op_norm(Some(l), tol).powi(2),
            Left::Gram { gram, .. } => spectral_norm(gram, tol, DEFAULT_SPECTRAL_MAX_ITER).value,
        }
    }

    fn gradient(
        &self,
        x: &DenseMatrix,
        s: &SparseMatrix,
        right: Option<&DenseMatrix>,
        scale: f64,
    ) -> Result<DenseMatrix> {
        match self {
            Left::Identity => gradient_factor(x, None, s, right, scale),
            Left::Dense(l) => gradient_factor(x, Some(l), s, right, scale),
            Left::Gram { gram, cross } => {
                // λ·(λ·LᵀL·S·R − LᵀX)·Rᵀ
                let sr = match right {
                    Some(r) => s.mul_dense(r)?,
                    None => s.to_dense(),
                };
                let mut t = gram.matmul(&sr)?;
                for (e, c) in t.data_mut().iter_mut().zip(cross.data()) {
                    *e = scale * *e - c;
                }
                let g = match right {
                    Some(r) => t.gemm(false, r, true)?,
                    None => t,
                };
                Ok(g.scaled(scale))
            }
        }
    }

    /// `L ← L·S`.
    fn advance(self, x: &DenseMatrix, s: &SparseMatrix) -> Result<Left> {
        let tall = x.rows() >= 4 * s.cols();
        Ok(match self {
            Left::Identity if tall => {
                let st = s.transpose();
                Left::Gram {
                    gram: st.mul_sparse(s)?.to_dense(),
                    cross: st.mul_dense(x)?,
                }
            }
            Left::Identity => Left::Dense(s.to_dense()),
            Left::Dense(l) => {
                let ls = SparseMatrix::dense_mul(&l, s)?;
                if tall {
                    Left::Gram {
                        gram: ls.gemm(true, &ls, false)?,
                        cross: ls.gemm(true, x, false)?,
                    }
                } else {
                    Left::Dense(ls)
                }
            }
            Left::Gram { gram, cross } => {
                let st = s.transpose();
                let gs = SparseMatrix::dense_mul(&gram, s)?;
                Left::Gram {
                    gram: st.mul_dense(&gs)?,
                    cross: st.mul_dense(&cross)?,
                }
            }
        })
    }
}

/// `λ = ⟨X, X̂⟩ / ⟨X̂, X̂⟩`, the minimizer of `½‖X − λX̂‖²_F`.
pub fn update_scale(x: &DenseMatrix, xhat: &DenseMatrix) -> Result<f64> {
    let num = frobenius_inner(x, xhat)?;
    let den = frobenius_inner(xhat, xhat)?;
    if den == 0.0 {
        return Err(Error::DegenerateScale);
    }
    Ok(num / den)
}

/// Runs the solver from `init` until `max_iter` or until the RMSE changes by
/// less than `obj_tol`.
pub fn palm4led(
    x: &DenseMatrix,
    sets: &[ConstraintSet],
    init: PalmState,
    config: &PalmConfig,
) -> Result<PalmState> {
    run(x, sets, init, config, None)
}

/// Same as [`palm4led`], reporting the objective after every block update.
pub fn palm4led_observed(
    x: &DenseMatrix,
    sets: &[ConstraintSet],
    init: PalmState,
    config: &PalmConfig,
    observer: &mut dyn FnMut(&BlockEvent),
) -> Result<PalmState> {
    run(x, sets, init, config, Some(observer))
}

fn rmse_of(obj: f64, count: f64) -> f64 {
    (2.0 * obj / count).sqrt()
}

fn run(
    x: &DenseMatrix,
    sets: &[ConstraintSet],
    init: PalmState,
    config: &PalmConfig,
    mut observer: Option<&mut dyn FnMut(&BlockEvent)>,
) -> Result<PalmState> {
    config.validate()?;
    let mut state = init;
    check_target(x, &state.factors)?;
    let q = state.factors.len();
    if sets.len() != q {
        return Err(Error::InvalidArgument(format!(
            "{} constraint sets for {q} factors",
            sets.len()
        )));
    }
    for (j, (s, f)) in sets.iter().zip(&state.factors).enumerate() {
        if s.shape() != f.shape() {
            return Err(dim_err(format!(
                "factor {j} is {}x{} but its constraint set is {}x{}",
                f.rows(),
                f.cols(),
                s.shape().0,
                s.shape().1
            )));
        }
    }
    if !state.scale.is_finite() {
        return Err(Error::InvalidArgument(
            "initial scale must be finite".into(),
        ));
    }

    let count = (x.rows() * x.cols()) as f64;
    let mut prev_rmse = rmse_of(objective(x, &state.factors, state.scale)?, count);
    let start = state.iteration;

    for it in start..start + config.max_iter {
        // R_j = S_{j+1} ⋯ S_Q from the factors as they stand at the start of the sweep
        let mut suffix: Vec<Option<DenseMatrix>> = vec![None; q];
        for j in (0..q.saturating_sub(1)).rev() {
            let next = &state.factors[j + 1];
            suffix[j] = Some(match &suffix[j + 1] {
                Some(r) => next.mul_dense(r)?,
                None => next.to_dense(),
            });
        }

        let mut left = Left::Identity;
        for j in 0..q {
            let right = suffix[j].as_ref();
            let grad = left.gradient(x, &state.factors[j], right, state.scale)?;
            let r_norm = op_norm(right, config.spectral_tol);
            let modulus =
                (state.scale * state.scale * left.sq_norm(config.spectral_tol) * r_norm * r_norm)
                    .max(config.min_modulus);
            let updated = step_with_modulus(&state.factors[j], &grad, modulus, &sets[j], config)?;
            if updated.triplets().iter().any(|t| !t.2.is_finite()) {
                return Err(Error::NonFinite {
                    iteration: it,
                    block: j,
                    trace: state.objective_trace,
                });
            }
            state.factors[j] = updated;
            if j + 1 < q {
                left = left.advance(x, &state.factors[j])?;
            }
            if let Some(obs) = observer.as_deref_mut() {
                obs(&BlockEvent {
                    iteration: it,
                    block: Block::Factor(j),
                    objective: half_sq_dist(x, state.scale, &product_dense(&state.factors)),
                });
            }
        }

        let xhat = product_dense(&state.factors);
        match update_scale(x, &xhat) {
            Ok(l) if l.is_finite() => state.scale = l,
            Ok(_) => {
                return Err(Error::NonFinite {
                    iteration: it,
                    block: q,
                    trace: state.objective_trace,
                })
            }
            Err(Error::DegenerateScale) => {}
            Err(e) => return Err(e),
        }
        let obj = half_sq_dist(x, state.scale, &xhat);
        if !obj.is_finite() {
            return Err(Error::NonFinite {
                iteration: it,
                block: q,
                trace: state.objective_trace,
            });
        }
        if let Some(obs) = observer.as_deref_mut() {
            obs(&BlockEvent {
                iteration: it,
                block: Block::Scale,
                objective: obj,
            });
        }
        state.objective_trace.push(obj);
        state.iteration = it + 1;

        let cur_rmse = rmse_of(obj, count);
        if (cur_rmse - prev_rmse).abs() < config.obj_tol {
            break;
        }
        prev_rmse = cur_rmse;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_trivial_cases() {
        let x = DenseMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        let f = vec![SparseMatrix::from_dense(&x)];
        assert_eq!(objective(&x, &f, 1.0).unwrap(), 0.0);
        let expect = 0.5 * x.data().iter().map(|v| v * v).sum::<f64>();
        assert_eq!(objective(&x, &f, 0.0).unwrap(), expect);
        assert!(objective(&x, &[SparseMatrix::identity(2)], 1.0).is_err());
    }

    #[test]
    fn zero_gradient_cases() {
        let x = DenseMatrix::identity(3);
        let s = SparseMatrix::identity(3);
        let g = gradient_factor(&x, None, &s, None, 1.0).unwrap();
        assert!(g.data().iter().all(|v| *v == 0.0));
        let g = gradient_factor(&x, None, &s, None, 0.0).unwrap();
        assert!(g.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lipschitz_examples() {
        assert!((lipschitz_modulus(None, None, 1.0, 1e-10, 1e-12) - 1.0).abs() < 1e-12);
        let l = DenseMatrix::diag(&[3.0, 1.0]);
        let r = DenseMatrix::identity(2);
        let m = lipschitz_modulus(Some(&l), Some(&r), 2.0, 1e-12, 1e-12);
        assert!((m - 36.0).abs() < 1e-8);
        assert_eq!(lipschitz_modulus(None, None, 0.0, 1e-7, 1e-12), 1e-12);
    }

    #[test]
    fn scale_examples() {
        let x = DenseMatrix::from_fn(2, 2, |i, j| (i + 2 * j) as f64 + 1.0);
        assert!((update_scale(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((update_scale(&x, &x.scaled(2.0)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(
            update_scale(&x, &DenseMatrix::zeros(2, 2)),
            Err(Error::DegenerateScale)
        );
    }

    #[test]
    fn fixed_point_is_kept() {
        let x = DenseMatrix::identity(2).scaled(0.5f64.sqrt());
        let s = SparseMatrix::from_dense(&x);
        let set = ConstraintSet::sp(2, 2, 2).unwrap();
        let out = update_factor(&x, None, None, &s, 1.0, &set, &PalmConfig::default()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn identity_target_converges() {
        // λ absorbs the two unit-norm factors: I = 4·(I/2)(I/2)
        let x = DenseMatrix::identity(4);
        let sets = vec![ConstraintSet::sp(4, 4, 4).unwrap(); 2];
        let init = PalmState::new(vec![SparseMatrix::identity(4); 2], 1.0);
        let out = palm4led(&x, &sets, init, &PalmConfig::default()).unwrap();
        assert!(out.final_objective().unwrap() < 1e-24);
        assert!((out.scale - 4.0).abs() < 1e-12);
        let prod = out.operator().unwrap().to_dense();
        assert!(prod.sub(&x).unwrap().data().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let x = DenseMatrix::identity(3);
        let sets = vec![ConstraintSet::sp(4, 2, 2).unwrap()];
        let init = PalmState::new(vec![SparseMatrix::identity(2)], 1.0);
        assert!(palm4led(&x, &sets, init, &PalmConfig::default()).is_err());
        let x = DenseMatrix::identity(2);
        let init = PalmState::new(vec![SparseMatrix::identity(2)], 1.0);
        assert!(palm4led(&x, &[], init, &PalmConfig::default()).is_err());
        let bad = PalmConfig {
            max_iter: 0,
            ..PalmConfig::default()
        };
        let init = PalmState::new(vec![SparseMatrix::identity(2)], 1.0);
        assert!(palm4led(&x, &sets, init, &bad).is_err());
    }
}
