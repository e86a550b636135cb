use super::dense::DenseMatrix;

/// Rank by Gaussian elimination with complete pivoting. Pivots below
/// `tol · max|aᵢⱼ|` count as zero.
pub fn rank(m: &DenseMatrix, tol: f64) -> usize {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let scale = a.data().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let thresh = tol * scale;
    let mut row_of: Vec<usize> = (0..rows).collect();
    let mut col_of: Vec<usize> = (0..cols).collect();
    for step in 0..rows.min(cols) {
        let mut best = (step, step, -1.0);
        for (ri, &r) in row_of.iter().enumerate().skip(step) {
            for (ci, &c) in col_of.iter().enumerate().skip(step) {
                let v = a.get(r, c).abs();
                if v > best.2 {
                    best = (ri, ci, v);
                }
            }
        }
        if best.2 <= thresh {
            return step;
        }
        row_of.swap(step, best.0);
        col_of.swap(step, best.1);
        let (pr, pc) = (row_of[step], col_of[step]);
        let p = a.get(pr, pc);
        for &r in &row_of[step + 1..] {
            let f = a.get(r, pc) / p;
            if f != 0.0 {
                for &c in &col_of[step..] {
                    let v = a.get(r, c) - f * a.get(pr, c);
                    a.set(r, c, v);
                }
            }
        }
    }
    rows.min(cols)
}

/// Least-squares solution of `min ‖Σ cⱼ·columns[j] − b‖` by Householder QR.
///
/// Columns whose remaining component falls below `1e-12` relative are treated
/// as dependent and get a zero coefficient; the flag reports that case.
pub fn least_squares(columns: &[&[f64]], b: &[f64]) -> (Vec<f64>, bool) {
    let k = columns.len();
    let m = b.len();
    // column-major working copy
    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut diag_ok = vec![true; k];
    let mut deficient = false;
    let col_scale = a
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0_f64, f64::max);
    let mut row = 0;
    let mut pivot_rows = vec![usize::MAX; k];
    for j in 0..k {
        if row >= m {
            diag_ok[j] = false;
            deficient = true;
            continue;
        }
        let norm = a[j][row..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-12 * col_scale.max(f64::MIN_POSITIVE) {
            diag_ok[j] = false;
            deficient = true;
            continue;
        }
        let alpha = if a[j][row] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][row..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            let apply = |col: &mut [f64]| {
                let dot: f64 = v.iter().zip(&col[row..]).map(|(x, y)| x * y).sum();
                let f = 2.0 * dot / vnorm2;
                for (c, vi) in col[row..].iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            };
            for col in a.iter_mut().skip(j) {
                apply(col);
            }
            apply(&mut rhs);
        }
        pivot_rows[j] = row;
        row += 1;
    }
    let mut coef = vec![0.0; k];
    for j in (0..k).rev() {
        if !diag_ok[j] {
            continue;
        }
        let r = pivot_rows[j];
        let mut s = rhs[r];
        for jj in j + 1..k {
            if diag_ok[jj] {
                s -= a[jj][r] * coef[jj];
            }
        }
        coef[j] = s / a[j][r];
    }
    (coef, deficient)
}

/// Solve `A x = b` for square `A` by partial-pivot elimination. `None` when singular.
pub fn solve_square(a: &DenseMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    let (x, deficient) = least_squares(&refs, b);
    (!deficient).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&DenseMatrix::identity(4), 1e-10), 4);
        assert_eq!(rank(&DenseMatrix::zeros(3, 3), 1e-10), 0);
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(rank(&m, 1e-10), 1);
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(rank(&m, 1e-10), 2);
    }

    #[test]
    fn least_squares_exact_and_overdetermined() {
        let c0 = [1.0, 0.0, 0.0];
        let c1 = [1.0, 1.0, 0.0];
        let (x, def) = least_squares(&[&c0, &c1], &[3.0, 2.0, 0.0]);
        assert!(!def);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        // projection of (0,0,1) onto span is zero
        let (x, _) = least_squares(&[&c0, &c1], &[0.0, 0.0, 1.0]);
        assert!(x.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn least_squares_flags_dependent_columns() {
        let c0 = [1.0, 2.0];
        let c1 = [2.0, 4.0];
        let (x, def) = least_squares(&[&c0, &c1], &[1.0, 2.0]);
        assert!(def);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert_eq!(x[1], 0.0);
    }
}
