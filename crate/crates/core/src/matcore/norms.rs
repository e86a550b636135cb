use super::dense::DenseMatrix;
use super::sparse::SparseMatrix;
use crate::error::{dim_err, Result};

pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-7;
pub const DEFAULT_SPECTRAL_MAX_ITER: usize = 100;

/// Minimal matrix-free interface used by the power iteration.
pub trait LinearOp {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_t(&self, x: &[f64]) -> Vec<f64>;
    fn is_zero(&self) -> bool;
}

impl LinearOp for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x).expect("length checked by caller")
    }
    fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        self.matvec_t(x).expect("length checked by caller")
    }
    fn is_zero(&self) -> bool {
        self.data().iter().all(|v| *v == 0.0)
    }
}

impl LinearOp for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x).expect("length checked by caller")
    }
    fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        self.matvec_t(x).expect("length checked by caller")
    }
    fn is_zero(&self) -> bool {
        self.nnz() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Deterministic start vector: all-ones plus a golden-ratio sequence, so it is
/// not orthogonal to structured singular vectors (e.g. zero-sum rows).
fn start_vector(n: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i + 1) as f64 * GOLDEN).fract())
        .collect();
    let s = norm2(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Operator 2-norm estimate by power iteration on `mᵀm`.
///
/// Iteration stops once the change in the Rayleigh quotient, corrected by the
/// observed contraction rate, is below `tol` relative. The estimate never
/// exceeds the true norm (up to rounding). A zero matrix gives 0.
pub fn spectral_norm<M: LinearOp + ?Sized>(m: &M, tol: f64, max_iter: usize) -> SpectralEstimate {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 || m.is_zero() {
        return SpectralEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut v = start_vector(n);
    let mut rho_prev: Option<f64> = None;
    let mut delta_prev: Option<f64> = None;
    let mut best = 0.0_f64;
    let mut restart = 0usize;
    for it in 1..=max_iter.max(1) {
        let mv = m.apply(&v);
        let rho = mv.iter().map(|x| x * x).sum::<f64>();
        best = best.max(rho);
        let w = m.apply_t(&mv);
        let wn = norm2(&w);
        if wn == 0.0 {
            // start vector in the null space; move to the next basis vector
            v = vec![0.0; n];
            v[restart % n] = 1.0;
            restart += 1;
            rho_prev = None;
            delta_prev = None;
            continue;
        }
        if let Some(prev) = rho_prev {
            let delta = (rho - prev).abs();
            let rate = match delta_prev {
                Some(dp) if dp > 0.0 => (delta / dp).clamp(0.0, 0.99),
                _ => 0.0,
            };
            if delta <= tol * rho * (1.0 - rate) {
                return SpectralEstimate {
                    value: best.sqrt(),
                    iterations: it,
                    converged: true,
                };
            }
            delta_prev = Some(delta);
        }
        rho_prev = Some(rho);
        v = w.into_iter().map(|x| x / wn).collect();
    }
    SpectralEstimate {
        value: best.sqrt(),
        iterations: max_iter,
        converged: false,
    }
}

/// Spectral norm with the default tolerance and iteration cap.
pub fn spectral_norm_default<M: LinearOp + ?Sized>(m: &M) -> f64 {
    spectral_norm(m, DEFAULT_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITER).value
}

/// `Σᵢⱼ AᵢⱼBᵢⱼ`.
pub fn frobenius_inner(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum())
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.data().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `(1/√(dn)) ‖X − approx‖_F`.
pub fn rmse(x: &DenseMatrix, approx: &DenseMatrix) -> Result<f64> {
    if x.shape() != approx.shape() {
        return Err(dim_err(format!(
            "rmse of {}x{} against {}x{}",
            x.rows(),
            x.cols(),
            approx.rows(),
            approx.cols()
        )));
    }
    let count = (x.rows() * x.cols()) as f64;
    if count == 0.0 {
        return Ok(0.0);
    }
    let sq: f64 = x
        .data()
        .iter()
        .zip(approx.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sq / count).sqrt())
}
