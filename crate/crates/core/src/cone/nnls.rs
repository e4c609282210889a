//! Lawson–Hanson active-set nonnegative least squares.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual_norm: f64,
}

fn lstsq(a: &DMatrix<f64>, cols: &[usize], b: &DVector<f64>) -> DVector<f64> {
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
    let svd = crate::linalg::dense::svd(&sub);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let eps = f64::EPSILON * smax * (a.nrows().max(cols.len()) as f64);
    svd.solve(b, eps).map(|m| m.column(0).into_owned()).unwrap_or_else(|_| DVector::zeros(cols.len()))
}

/// Inner Lawson–Hanson loop after column `t` entered the passive set; false when `t` is infeasible at once.
fn enter(a: &DMatrix<f64>, b: &DVector<f64>, x: &mut DVector<f64>, passive: &mut [bool], t: usize) -> bool {
    let n = a.ncols();
    passive[t] = true;
    let mut inner = 0;
    loop {
        inner += 1;
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let s_p = lstsq(a, &cols, b);
        let mut s = DVector::zeros(n);
        for (k, &j) in cols.iter().enumerate() {
            s[j] = s_p[k];
        }
        if cols.iter().all(|&j| s[j] > 0.0) {
            *x = s;
            return true;
        }
        // newly added column immediately infeasible: degenerate pick
        if inner == 1 && s[t] <= 0.0 {
            passive[t] = false;
            return false;
        }
        let mut alpha = f64::INFINITY;
        for &j in &cols {
            if s[j] <= 0.0 {
                let denom = x[j] - s[j];
                if denom > 0.0 {
                    alpha = alpha.min(x[j] / denom);
                }
            }
        }
        if !alpha.is_finite() {
            alpha = 0.0;
        }
        *x = &*x + (&s - &*x) * alpha;
        for &j in &cols {
            if x[j] <= f64::EPSILON * x.amax().max(1.0) {
                x[j] = 0.0;
                passive[j] = false;
            }
        }
        if inner > 3 * n + 10 || !passive.iter().any(|&p| p) {
            return true;
        }
    }
}

/// Minimizes `‖Ax − b‖` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    if n == 0 {
        return NnlsSolution { x, residual_norm: b.norm() };
    }
    let anorm = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tol = 10.0 * f64::EPSILON * anorm * (a.nrows().max(n) as f64) * b.norm().max(1.0);
    let mut passive = vec![false; n];
    let mut banned = vec![false; n];
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let pick = (0..n)
            .filter(|&j| !passive[j] && !banned[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        if let Some(t) = pick.filter(|&t| w[t] > tol) {
            if enter(a, b, &mut x, &mut passive, t) {
                banned.iter_mut().for_each(|bj| *bj = false);
            } else {
                banned[t] = true;
            }
            continue;
        }
        // Gradients within rounding of zero: nearly parallel columns can still lower the residual.
        let res = (b - a * &x).norm();
        if res <= tol {
            break;
        }
        let mut improved = false;
        for j in (0..n).filter(|&j| !passive[j] && !banned[j] && w[j].abs() <= tol) {
            let (mut x2, mut p2) = (x.clone(), passive.clone());
            if enter(a, b, &mut x2, &mut p2, j) && (b - a * &x2).norm() < res * (1.0 - 1e-6) {
                x = x2;
                passive = p2;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    let residual_norm = (b - a * &x).norm();
    NnlsSolution { x, residual_norm }
}
