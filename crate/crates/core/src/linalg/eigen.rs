use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::{self, to_complex};
use super::{vec_serde, SquareMatrix, ToleranceConfig, MAX_DIM};
use crate::error::{Error, Result};

/// One distinct eigenvalue with its multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    /// Algebraic multiplicity.
    pub multiplicity: usize,
    /// Size of the largest Jordan block.
    pub degree: usize,
    /// Eigenspace basis, only for real eigenvalues.
    #[serde(with = "vec_serde::list")]
    pub eigenvectors: Vec<DVector<f64>>,
}

impl Eigenvalue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Spectrum {
    /// Distinct eigenvalues, sorted by modulus, then real part, then imaginary part (all descending).
    pub eigenvalues: Vec<Eigenvalue>,
    pub spectral_radius: f64,
    /// Some rank decision had a singular value within 10× of the cutoff.
    pub near_defective: bool,
}

impl Spectrum {
    /// Cluster radius `eigClusterTol·max(1, ρ)`.
    pub fn cluster_radius(&self, tol: &ToleranceConfig) -> f64 {
        tol.eig_cluster_tol * self.spectral_radius.max(1.0)
    }

    /// Eigenvalues with modulus within the cluster radius of ρ.
    pub fn peripheral(&self, tol: &ToleranceConfig) -> impl Iterator<Item = &Eigenvalue> {
        let r = self.cluster_radius(tol);
        let rho = self.spectral_radius;
        self.eigenvalues.iter().filter(move |e| (e.modulus() - rho).abs() <= r)
    }

    /// The real eigenvalue equal to ρ, if any.
    pub fn rho_eigenvalue(&self, tol: &ToleranceConfig) -> Option<&Eigenvalue> {
        let r = self.cluster_radius(tol);
        self.eigenvalues
            .iter()
            .find(|e| e.is_real() && (e.re - self.spectral_radius).abs() <= r)
    }

    pub fn algebraic_total(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Eigenvalues repeated by algebraic multiplicity.
    pub fn all_values(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value(), e.multiplicity))
            .collect()
    }
}

/// Clustered eigenvalues with multiplicities, degrees and real eigenvectors.
pub fn eigen_decompose(a: &SquareMatrix, tol: &ToleranceConfig) -> Result<Spectrum> {
    let n = a.dim();
    if n > MAX_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    let raw = raw_eigenvalues(a.as_matrix())?;
    let rho0 = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let radius = tol.eig_cluster_tol * rho0.max(1.0);
    let clusters = cluster(a.as_matrix(), &raw, radius, DEFECT_RADIUS * rho0.max(1.0));

    let mut near_defective = false;
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    for (value, mult) in clusters {
        let (degree, near, vectors) = if value.im == 0.0 {
            let m = a.as_matrix() - DMatrix::identity(n, n) * value.re;
            let (d, near) = degree_of(&m, mult, tol.rank_tol);
            let mut basis = dense::null_space(&m, tol.rank_tol);
            if basis.ncols() == 0 {
                // cluster mean slightly off: take the least singular direction
                basis = least_singular_vector(&m);
            }
            let vecs = basis
                .column_iter()
                .map(|c| {
                    let mut v = c.into_owned();
                    dense::sign_normalize(&mut v);
                    v
                })
                .collect();
            (d, near, vecs)
        } else {
            let m = to_complex(a.as_matrix()) - DMatrix::identity(n, n) * value;
            let (d, near) = degree_of(&m, mult, tol.rank_tol);
            (d, near, Vec::new())
        };
        near_defective |= near;
        eigenvalues.push(Eigenvalue { re: value.re, im: value.im, multiplicity: mult, degree, eigenvectors: vectors });
    }
    eigenvalues.sort_by(|x, y| {
        y.modulus()
            .total_cmp(&x.modulus())
            .then(y.re.total_cmp(&x.re))
            .then(y.im.total_cmp(&x.im))
    });
    let spectral_radius = eigenvalues.iter().map(Eigenvalue::modulus).fold(0.0, f64::max);
    Ok(Spectrum { eigenvalues, spectral_radius, near_defective })
}

fn least_singular_vector(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = dense::svd(m);
    let v_t = svd.v_t.expect("v_t requested");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    DMatrix::from_fn(m.ncols(), 1, |r, _| v_t[(i, r)])
}

/// Smallest k ≥ 1 with rank(M^k) = rank(M^{k+1}), clamped to [1, mult].
fn degree_of<T>(m: &DMatrix<T>, mult: usize, rank_tol: f64) -> (usize, bool)
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let mut near = false;
    let mut pow = m.clone();
    let first = dense::rank(&pow, rank_tol);
    near |= first.near_cutoff;
    let mut prev = first.rank;
    for k in 1..=mult {
        pow = &pow * m;
        let next = dense::rank(&pow, rank_tol);
        near |= next.near_cutoff;
        if next.rank == prev {
            return (k.clamp(1, mult), near);
        }
        prev = next.rank;
    }
    (mult.max(1), near)
}

/// Relative radius within which eigenvalues with nearly parallel eigenvectors merge;
/// rounding splits a Jordan block of size k by about ε^{1/k}.
pub const DEFECT_RADIUS: f64 = 1e-5;
/// Sine of the eigenvector angle below which two nearby eigenvalues count as one.
pub const PARALLEL_SINE: f64 = 1e-4;

fn unit_eigvec(a: &DMatrix<f64>, z: Complex64) -> DVector<Complex64> {
    let n = a.nrows();
    let m = to_complex(a) - DMatrix::identity(n, n) * z;
    let svd = dense::svd(&m);
    let v_t = svd.v_t.expect("v_t requested");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    DVector::from_fn(n, |r, _| v_t[(i, r)].conj())
}

/// Single-linkage clustering; clusters straddling the real axis become real.
///
/// Eigenvalues closer than `radius` merge; eigenvalues closer than `wide` merge when their
/// eigenvectors are nearly parallel, the signature of a rounded defective eigenvalue.
fn cluster(a: &DMatrix<f64>, raw: &[Complex64], radius: f64, wide: f64) -> Vec<(Complex64, usize)> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    let mut vecs: Vec<Option<DVector<Complex64>>> = vec![None; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = (raw[i] - raw[j]).norm();
            let both_real = raw[i].im.abs() <= radius && raw[j].im.abs() <= radius && (raw[i].re - raw[j].re).abs() <= radius;
            let mut join = d <= radius || both_real;
            if !join && d <= wide {
                for k in [i, j] {
                    if vecs[k].is_none() {
                        vecs[k] = Some(unit_eigvec(a, raw[k]));
                    }
                }
                let (u, v) = (vecs[i].as_ref().unwrap(), vecs[j].as_ref().unwrap());
                let c = u.dotc(v).norm().min(1.0);
                join = (1.0 - c * c).max(0.0).sqrt() <= PARALLEL_SINE;
            }
            if join {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &z) in raw.iter().enumerate() {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(z),
            None => groups.push((r, vec![z])),
        }
    }
    let mut out = Vec::new();
    for (_, members) in &groups {
        let k = members.len();
        let mean = members.iter().sum::<Complex64>() / k as f64;
        if mean.im.abs() <= radius {
            out.push((Complex64::new(mean.re, 0.0), k));
        } else if mean.im > 0.0 {
            out.push((mean, k));
            out.push((mean.conj(), k));
        }
    }
    out
}

/// All n eigenvalues, conjugate pairs exact.
pub fn raw_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    match n {
        0 => Err(Error::EmptyMatrix),
        1 => Ok(vec![Complex64::new(a[(0, 0)], 0.0)]),
        2 => Ok(quadratic_roots(a)),
        _ => {
            let mut h = balance(a.clone());
            h = h.hessenberg().unpack_h();
            hqr(&mut h)
        }
    }
}

fn quadratic_roots(a: &DMatrix<f64>) -> Vec<Complex64> {
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    // discriminant as (a-d)^2 + 4bc avoids cancellation in tr^2 - 4det
    let diff = a[(0, 0)] - a[(1, 1)];
    let disc = diff * diff + 4.0 * a[(0, 1)] * a[(1, 0)];
    if disc >= 0.0 {
        let r = disc.sqrt();
        let big = 0.5 * (tr + if tr >= 0.0 { r } else { -r });
        let small = if big != 0.0 { det / big } else { 0.5 * (tr - r) };
        let (l1, l2) = if big >= small { (big, small) } else { (small, big) };
        vec![Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let s = 0.5 * (-disc).sqrt();
        vec![Complex64::new(0.5 * tr, s), Complex64::new(0.5 * tr, -s)]
    }
}

/// Diagonal similarity scaling by powers of two.
fn balance(mut a: DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
    a
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn hqr(a: &mut DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let max_its = 60;
    let total_cap = 100 * n.max(1);
    let mut total = 0usize;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= f64::EPSILON * s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = z;
                    wi[nu] = -z;
                }
                nn -= 2;
                break;
            }
            if its >= max_its || total >= total_cap {
                return Err(Error::NonConvergence(total));
            }
            if its == 10 || its == 20 || its == 40 {
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total += 1;
            let (mut p, mut q, mut r);
            let mut m = nu - 2;
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = 0.0;
                    if k + 1 != nu {
                        r = a[(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nu {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn upper_triangular_two_by_two() {
        let a = m(&[&[2.0, 1.0], &[0.0, 1.0]]);
        let s = eigen_decompose(&a, &tol()).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert_abs_diff_eq!(s.eigenvalues[0].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1].re, 1.0, epsilon = 1e-14);
        assert!(s.eigenvalues.iter().all(|e| e.degree == 1));
        let v1 = &s.eigenvalues[0].eigenvectors[0];
        let v2 = &s.eigenvalues[1].eigenvectors[0];
        assert_abs_diff_eq!(v1[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v2[0], -v2[1], epsilon = 1e-12);
        for e in &s.eigenvalues {
            let v = &e.eigenvectors[0];
            assert!((a.apply(v) - v * e.re).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_three() {
        let s = eigen_decompose(&SquareMatrix::identity(3), &tol()).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert_eq!(s.eigenvalues[0].multiplicity, 3);
        assert_eq!(s.eigenvalues[0].degree, 1);
        assert_eq!(s.eigenvalues[0].eigenvectors.len(), 3);
    }

    #[test]
    fn jordan_block() {
        let s = eigen_decompose(&m(&[&[1.0, 1.0], &[0.0, 1.0]]), &tol()).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert_eq!(s.eigenvalues[0].multiplicity, 2);
        assert_eq!(s.eigenvalues[0].degree, 2);
    }

    #[test]
    fn jordan_block_three_by_three() {
        let a = m(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]]);
        let s = eigen_decompose(&a, &tol()).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert_eq!(s.eigenvalues[0].degree, 3);
    }

    #[test]
    fn rotation_pair() {
        let a = m(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, -2.0], &[0.0, 2.0, 0.0]]);
        let s = eigen_decompose(&a, &tol()).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        assert_abs_diff_eq!(s.spectral_radius, 2.0, epsilon = 1e-12);
        assert_eq!(s.eigenvalues[0].im, -s.eigenvalues[1].im);
        assert_eq!(s.eigenvalues[0].re, s.eigenvalues[1].re);
    }

    #[test]
    fn too_large() {
        let a = SquareMatrix::identity(33);
        assert_eq!(eigen_decompose(&a, &tol()), Err(Error::DimensionTooLarge(33)));
    }

    #[test]
    fn companion_matrix_roots() {
        // x^4 - 10x^3 + 35x^2 - 50x + 24 = (x-1)(x-2)(x-3)(x-4)
        let a = m(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let s = eigen_decompose(&a, &tol()).unwrap();
        let re: Vec<f64> = s.eigenvalues.iter().map(|e| e.re).collect();
        for (x, y) in re.iter().zip([4.0, 3.0, 2.0, 1.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
        }
    }
}
