//! Independent reference computations for the integration tests. Nothing in
//! here calls into the library's numerical kernels.
#![allow(dead_code, clippy::needless_range_loop)]

use palmfact_core::rng::{stream, Rng};
use palmfact_core::{DenseMatrix, SparseMatrix};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub type Mat = Vec<Vec<f64>>;

pub fn to_rows(m: &DenseMatrix) -> Mat {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn sparse_rows(s: &SparseMatrix) -> Mat {
    let mut out = vec![vec![0.0; s.cols()]; s.rows()];
    for &(i, j, v) in s.triplets() {
        out[i][j] = v;
    }
    out
}

pub fn naive_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        assert_eq!(a[i].len(), k);
        for j in 0..m {
            let mut acc = 0.0;
            for t in 0..k {
                acc += a[i][t] * b[t][j];
            }
            c[i][j] = acc;
        }
    }
    c
}

pub fn naive_chain(factors: &[Mat]) -> Mat {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = naive_mul(&acc, f);
    }
    acc
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn naive_matvec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn elementwise_inner(a: &Mat, b: &Mat) -> f64 {
    let mut s = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            s += x * y;
        }
    }
    s
}

pub fn elementwise_dist(a: &Mat, b: &Mat) -> f64 {
    let mut s = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            s += (x - y) * (x - y);
        }
    }
    s.sqrt()
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_max_eigenvalue(sym: &Mat) -> f64 {
    let n = sym.len();
    let mut a = sym.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest singular value via the eigenvalues of `mᵀm`.
pub fn oracle_sigma_max(m: &Mat) -> f64 {
    let mtm = naive_mul(&transpose(m), m);
    jacobi_max_eigenvalue(&mtm).max(0.0).sqrt()
}

/// All subsets of `0..n` of size `1..=p`.
pub fn supports(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, &mut Vec::new(), &mut out);
    out
}

/// Smallest Frobenius distance from `a` to a unit-norm matrix with at most
/// `p` non-zeros, by trying every support.
pub fn brute_sp_distance(a: &Mat, p: usize) -> f64 {
    let cols = a[0].len();
    let flat: Vec<f64> = a.iter().flatten().copied().collect();
    let mut best = f64::INFINITY;
    for s in supports(flat.len(), p) {
        let norm = s.iter().map(|&i| flat[i] * flat[i]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut u = vec![vec![0.0; cols]; a.len()];
        for &i in &s {
            u[i / cols][i % cols] = flat[i] / norm;
        }
        best = best.min(elementwise_dist(&u, a));
    }
    best
}

/// `½‖X − λ·∏F‖²` by the naive product.
pub fn oracle_objective(x: &Mat, factors: &[Mat], scale: f64) -> f64 {
    let prod = naive_chain(factors);
    let mut s = 0.0;
    for (rx, rp) in x.iter().zip(&prod) {
        for (a, b) in rx.iter().zip(rp) {
            let d = a - scale * b;
            s += d * d;
        }
    }
    0.5 * s
}

/// Central finite-difference gradient of the objective in factor `j`.
pub fn fd_gradient(x: &Mat, factors: &[Mat], j: usize, scale: f64, h: f64) -> Mat {
    let (r, c) = (factors[j].len(), factors[j][0].len());
    let mut g = vec![vec![0.0; c]; r];
    for a in 0..r {
        for b in 0..c {
            let mut plus = factors.to_vec();
            let mut minus = factors.to_vec();
            plus[j][a][b] += h;
            minus[j][a][b] -= h;
            g[a][b] = (oracle_objective(x, &plus, scale) - oracle_objective(x, &minus, scale))
                / (2.0 * h);
        }
    }
    g
}

/// Minimizer of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section<T: PartialOrd>(
    f: impl Fn(f64) -> T,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn dd_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(a.0, b.0);
    let e = e + a.1 + b.1;
    let hi = s + e;
    (hi, e - (hi - s))
}

fn dd_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let p = a.0 * b.0;
    let e = a.0.mul_add(b.0, -p) + a.0 * b.1 + a.1 * b.0;
    let hi = p + e;
    (hi, e - (hi - p))
}

/// `‖x − t·h‖²` in double-double arithmetic, compared as `(hi, lo)`. Plain
/// f64 evaluation limits a comparison-based minimizer to about `√ε`.
pub fn dd_residual_sq(x: &Mat, h: &Mat, t: f64) -> (f64, f64) {
    let mut acc = (0.0, 0.0);
    for (rx, rh) in x.iter().zip(h) {
        for (a, b) in rx.iter().zip(rh) {
            let th = dd_mul((t, 0.0), (*b, 0.0));
            let r = dd_add((*a, 0.0), (-th.0, -th.1));
            acc = dd_add(acc, dd_mul(r, r));
        }
    }
    acc
}

/// Rank by Gaussian elimination with full pivoting.
pub fn oracle_rank(m: &Mat, tol: f64) -> usize {
    let mut a = m.clone();
    let rows = a.len();
    let cols = a[0].len();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    let mut used_rows = vec![false; rows];
    let mut used_cols = vec![false; cols];
    loop {
        let mut best = (0.0, 0, 0);
        for i in 0..rows {
            if used_rows[i] {
                continue;
            }
            for j in 0..cols {
                if !used_cols[j] && a[i][j].abs() > best.0 {
                    best = (a[i][j].abs(), i, j);
                }
            }
        }
        if best.0 <= tol * scale {
            return rank;
        }
        let (_, pi, pj) = best;
        used_rows[pi] = true;
        used_cols[pj] = true;
        rank += 1;
        for i in 0..rows {
            if i != pi && !used_rows[i] {
                let f = a[i][pj] / a[pi][pj];
                for j in 0..cols {
                    a[i][j] -= f * a[pi][j];
                }
            }
        }
    }
}

/// Orthonormal columns by modified Gram-Schmidt on a Gaussian matrix.
pub fn random_orthonormal(n: usize, rng: &mut Rng) -> Mat {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    transpose(&cols)
}

pub fn rng(seed: u64) -> Rng {
    stream(seed, 99)
}

pub fn gaussian(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_dense(rows: usize, cols: usize, rng: &mut Rng) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

/// Random sparse matrix with each entry kept with probability `density`.
pub fn random_sparse(rows: usize, cols: usize, density: f64, rng: &mut Rng) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random::<f64>() < density {
                t.push((i, j, gaussian(rng)));
            }
        }
    }
    SparseMatrix::from_triplets(rows, cols, t).unwrap()
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    let mut m = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            m = m.max((x - y).abs());
        }
    }
    m
}
