//! SVD-based rank, null-space and range helpers for real and complex matrices.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, SymmetricEigen, SVD};
use num_complex::Complex64;

/// Result of a rank decision: the rank and whether a singular value sat within
/// a factor 10 of the cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankDecision {
    pub rank: usize,
    pub near_cutoff: bool,
}

fn pad_square<T: ComplexField>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows().max(m.ncols());
    let mut out = DMatrix::zeros(n, m.ncols());
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

fn reconstruction_error<T: ComplexField<RealField = f64>>(svd: &SVD<T, Dyn, Dyn>, m: &DMatrix<T>) -> f64 {
    match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => {
            let sigma = DMatrix::from_diagonal(&svd.singular_values.map(T::from_real));
            (u * sigma * v_t - m).norm()
        }
        _ => f64::INFINITY,
    }
}

/// One-sided Jacobi SVD of a matrix with at least as many rows as columns.
fn jacobi_tall<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> (DMatrix<T>, DVector<f64>, DMatrix<T>) {
    let (r, c) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<T>::identity(c, c);
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.clone().modulus();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = (gamma / T::from_real(g)).conjugate();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)].clone();
                        let y = mat[(i, q)].clone() * phase.clone();
                        mat[(i, p)] = x.clone() * T::from_real(cs) - y.clone() * T::from_real(sn);
                        mat[(i, q)] = x * T::from_real(sn) + y * T::from_real(cs);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<f64> = (0..c).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma = DVector::from_iterator(c, order.iter().map(|&j| norms[j]));
    let mut u = DMatrix::<T>::zeros(r, c);
    let v_sorted = DMatrix::from_fn(c, c, |i, k| v[(i, order[k])].clone());
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let mut filled = 0;
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > f64::EPSILON * smax && norms[j] > 0.0 {
            u.set_column(k, &(a.column(j) / T::from_real(norms[j])));
            filled += 1;
        }
    }
    // complete U with orthonormal columns for vanishing singular values
    let mut e = 0;
    for k in filled..c {
        while e < r {
            let mut w = DVector::<T>::zeros(r);
            w[e] = T::one();
            e += 1;
            for _ in 0..2 {
                for i in 0..k {
                    let proj = u.column(i).dotc(&w);
                    w -= u.column(i) * proj;
                }
            }
            let wn = w.norm();
            if wn > 1e-8 {
                u.set_column(k, &(w / T::from_real(wn)));
                break;
            }
        }
    }
    (u, sigma, v_sorted.adjoint())
}

fn jacobi_svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> SVD<T, Dyn, Dyn> {
    if m.nrows() >= m.ncols() {
        let (u, s, v_t) = jacobi_tall(m);
        SVD { u: Some(u), v_t: Some(v_t), singular_values: s }
    } else {
        let (u, s, v_t) = jacobi_tall(&m.adjoint());
        SVD { u: Some(v_t.adjoint()), v_t: Some(u.adjoint()), singular_values: s }
    }
}

/// Full SVD checked by reconstruction.
///
/// nalgebra's implicit-shift SVD can return an inaccurate factorization for nearly
/// rank-deficient 2×2 subproblems; such results are replaced by a one-sided Jacobi SVD.
pub fn svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> SVD<T, Dyn, Dyn> {
    let limit = 1e3 * f64::EPSILON * m.norm() * (m.nrows().max(m.ncols()).max(1) as f64);
    let fast = m.clone().svd(true, true);
    if reconstruction_error(&fast, m) <= limit {
        return fast;
    }
    jacobi_svd(m)
}

/// Singular values in decreasing order.
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let svd = svd(m);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank with cutoff `rel_tol · max(1, σ_max)`.
pub fn rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_tol: f64) -> RankDecision {
    let s = singular_values(m);
    let cutoff = rel_tol * s.first().copied().unwrap_or(0.0).max(1.0);
    let rank = s.iter().filter(|&&x| x > cutoff).count();
    let near_cutoff = s.iter().any(|&x| x > cutoff / 10.0 && x <= cutoff * 10.0);
    RankDecision { rank, near_cutoff }
}

/// Orthonormal basis (as columns) of the right null space, cutoff as in [`rank`].
pub fn null_space<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_tol: f64) -> DMatrix<T> {
    let ncols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    let sq = pad_square(m);
    let svd = svd(&sq);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = rel_tol * smax.max(1.0);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    let mut out = DMatrix::zeros(ncols, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        for r in 0..ncols {
            out[(r, c)] = v_t[(i, r)].clone().conjugate();
        }
    }
    out
}

/// Orthonormal basis (as columns) of the column space, cutoff as in [`rank`].
pub fn range_basis<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_tol: f64) -> DMatrix<T> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = svd(m);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = rel_tol * smax.max(1.0);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    DMatrix::from_fn(m.nrows(), idx.len(), |r, c| u[(r, idx[c])].clone())
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Spectral norm.
pub fn norm2<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Extreme eigenvalues `(min, max)` of the symmetric part of `m`.
pub fn sym_eig_range(m: &DMatrix<f64>) -> (f64, f64) {
    let s = (m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(s).eigenvalues;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn sym_min_eig(m: &DMatrix<f64>) -> f64 {
    sym_eig_range(m).0
}

pub fn sym_max_eig(m: &DMatrix<f64>) -> f64 {
    sym_eig_range(m).1
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Flips the sign so that the first coordinate with magnitude above
/// `1e-12·‖v‖` is positive.
pub fn sign_normalize(v: &mut DVector<f64>) {
    let thresh = 1e-12 * v.norm();
    if let Some(x) = v.iter().find(|x| x.abs() > thresh) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
}

pub fn unit(v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n == 0.0 {
        v.clone()
    } else {
        v / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_recovers_from_bad_two_by_two_deflation() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[-0.0034905475442945644, 0.014095225605486338, -0.05858036831657694, 0.23655415002848168],
        );
        let s = svd(&m);
        let recon = s.u.as_ref().unwrap() * DMatrix::from_diagonal(&s.singular_values) * s.v_t.as_ref().unwrap();
        assert!((recon - &m).norm() < 1e-14);
        let r = range_basis(&m, 1e-10);
        let col: DVector<f64> = m.column(1).normalize();
        assert!((r.column(0).dot(&col).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_factorizes_real_complex_and_wide() {
        let real = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let cplx = to_complex(&DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.0, 1.0]))
            .map(|z| z * Complex64::new(0.6, 0.8))
            + DMatrix::from_fn(2, 3, |i, j| Complex64::new(0.0, (i + 2 * j) as f64));
        let r = jacobi_svd(&real);
        let c = jacobi_svd(&cplx);
        assert!(reconstruction_error(&r, &real) < 1e-13);
        assert!(reconstruction_error(&c, &cplx) < 1e-13);
        let u = c.u.unwrap();
        assert!((u.adjoint() * &u - DMatrix::identity(2, 2)).norm() < 1e-13);
        assert!(r.singular_values[0] >= r.singular_values[1]);
    }

    #[test]
    fn rank_and_null_space() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rank(&m, 1e-10).rank, 2);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 1);
        let x: f64 = ns[(2, 0)];
        assert!((x.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_null_space() {
        // [[1, i], [-i, 1]] has kernel spanned by (-i, 1)
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[one, i, -i, one]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * &ns).norm() < 1e-12);
    }

    #[test]
    fn range_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let r = range_basis(&m, 1e-10);
        assert_eq!(r.ncols(), 1);
        let c = r.column(0);
        assert!((c[1] / c[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sign_normalization() {
        let mut v = DVector::from_vec(vec![0.0, -2.0, 1.0]);
        sign_normalize(&mut v);
        assert_eq!(v[1], 2.0);
    }
}
