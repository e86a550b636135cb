mod common;

use common::*;
use palmfact_core::transforms::{hadamard, hadamard_butterfly_factors};

/// Sylvester matrix by the block recursion, in integers.
fn sylvester(n: usize) -> Vec<Vec<i64>> {
    let mut h = vec![vec![1i64]];
    while h.len() < n {
        let m = h.len();
        let mut next = vec![vec![0i64; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

fn int_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut c = vec![vec![0i64; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0 {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

fn as_int(m: &Mat) -> Vec<Vec<i64>> {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|v| {
                    assert_eq!(v.fract(), 0.0);
                    *v as i64
                })
                .collect()
        })
        .collect()
}

#[test]
fn hadamard_matches_recursion_and_is_orthogonal() {
    for n in [1usize, 2, 4, 8, 32, 64] {
        let h = as_int(&to_rows(&hadamard(n).unwrap()));
        assert_eq!(h, sylvester(n));
        let ht: Vec<Vec<i64>> = (0..n).map(|j| h.iter().map(|r| r[j]).collect()).collect();
        let hht = int_mul(&h, &ht);
        for (i, row) in hht.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { n as i64 } else { 0 });
            }
        }
    }
}

#[test]
fn butterfly_products_are_exact() {
    let mut n = 2;
    while n <= 1024 {
        let b = hadamard_butterfly_factors(n).unwrap();
        assert_eq!(b.factors.len(), n.trailing_zeros() as usize);
        let mut prod: Option<Vec<Vec<i64>>> = None;
        for f in &b.factors {
            assert_eq!(f.nnz(), 2 * n);
            let mut rows = vec![0usize; n];
            let mut cols = vec![0usize; n];
            for &(i, j, v) in f.triplets() {
                assert!(v == 1.0 || v == -1.0);
                rows[i] += 1;
                cols[j] += 1;
            }
            assert!(rows.iter().chain(&cols).all(|&c| c == 2));
            let fi = as_int(&sparse_rows(f));
            prod = Some(match prod {
                None => fi,
                Some(p) => int_mul(&p, &fi),
            });
        }
        assert_eq!(prod.unwrap(), sylvester(n), "n={n}");
        n *= 2;
    }
}

#[test]
fn apply_cost_is_bounded() {
    let mut r = rng(50);
    for n in [2usize, 8, 32, 256, 1024] {
        let op = hadamard_butterfly_factors(n).unwrap().operator();
        let v: Vec<f64> = (0..n).map(|_| gaussian(&mut r)).collect();
        let (out, cost) = op.apply_counted(&v).unwrap();
        let log = n.trailing_zeros() as usize;
        assert!(cost <= 2 * n * log, "n={n}: {cost}");
        let want = naive_matvec(&to_rows(&hadamard(n).unwrap()), &v);
        let err = out
            .iter()
            .zip(&want)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12 * n as f64);
    }
}

#[test]
fn butterfly_relative_complexity() {
    let op = hadamard_butterfly_factors(32).unwrap().operator();
    assert_eq!(op.relative_complexity(5).unwrap(), 0.3125);
    assert!(hadamard(6).is_err());
}
