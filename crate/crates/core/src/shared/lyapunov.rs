//! Common Lyapunov inequalities `V − B_jᵀVB_j ⪰ 0` for commuting blocks with spectral radius at most one.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense, mat_serde, ToleranceConfig};

type CMat = DMatrix<Complex64>;

/// Sweep cap of the alternating-projection fallback.
pub const MAX_SWEEPS: usize = 10_000;
/// Splitting bases worse conditioned than this hand over to the projection fallback.
pub const MAX_SPLIT_COND: f64 = 1e8;
/// Default cap on squaring steps of the series, i.e. `2^64` terms per member.
pub const DEFAULT_DOUBLINGS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LyapunovMethod {
    Series,
    Reduction,
    Projection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LyapunovCertificate {
    /// Symmetric positive definite, scaled so its smallest eigenvalue is 1.
    #[serde(with = "mat_serde")]
    pub v: DMatrix<f64>,
    /// `λmin(V − B_jᵀVB_j)` per block.
    pub residuals: Vec<f64>,
    pub method: LyapunovMethod,
    pub min_eig: f64,
    /// Blocks split on by the unit-circle reduction, in order.
    pub splits: Vec<usize>,
}

impl LyapunovCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_eig > 0.0 && self.residuals.iter().all(|&r| r >= -tol)
    }
}

enum Stall {
    Hypothesis(String),
    Numeric,
}

fn complex_eigenvalues(m: &CMat) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

/// `Σ_k (Bᵀ)^k X B^k` by repeated squaring.
fn stein_sum(b: &CMat, x: &CMat, doublings: u32) -> Option<CMat> {
    let mut v = x.clone();
    let mut a = b.clone();
    for _ in 0..doublings {
        let an = a.norm();
        if an * an <= 1e-18 {
            return Some(v);
        }
        v = &v + a.adjoint() * &v * &a;
        a = &a * &a;
        if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
    }
    let an = a.norm();
    (an * an <= 1e-18).then_some(v)
}

/// Nested series `L_1(L_2(⋯L_q(I)))`.
fn series(blocks: &[CMat], doublings: u32) -> Option<CMat> {
    let n = blocks[0].nrows();
    let mut v = CMat::identity(n, n);
    for b in blocks.iter().rev() {
        v = stein_sum(b, &v, doublings)?;
    }
    Some(v)
}

fn restrict(pinv: &CMat, b: &CMat, p: &CMat, range: std::ops::Range<usize>) -> CMat {
    let full = pinv * b * p;
    full.view((range.start, range.start), (range.len(), range.len())).into_owned()
}

fn reduce(
    blocks: &[CMat],
    ids: &[usize],
    tol: &ToleranceConfig,
    doublings: u32,
    splits: &mut Vec<usize>,
) -> std::result::Result<CMat, Stall> {
    let n = blocks.first().map_or(0, |b| b.nrows());
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    if blocks.is_empty() {
        return Ok(CMat::identity(n, n));
    }
    let ut = tol.eig_cluster_tol;
    let spectra: Vec<Vec<Complex64>> = blocks.iter().map(complex_eigenvalues).collect();
    let rhos: Vec<f64> = spectra.iter().map(|s| s.iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    if let Some(k) = rhos.iter().position(|&r| r > 1.0 + ut) {
        return Err(Stall::Hypothesis(format!("block {} has spectral radius {:.6} > 1", ids[k], rhos[k])));
    }
    let Some(j) = rhos.iter().position(|&r| r >= 1.0 - ut) else {
        return series(blocks, doublings).ok_or(Stall::Numeric);
    };
    splits.push(ids[j]);

    // cluster the unit-modulus eigenvalues of the split block
    let mut unit: Vec<(Complex64, usize)> = Vec::new();
    for z in spectra[j].iter().filter(|z| (z.norm() - 1.0).abs() <= ut) {
        match unit.iter_mut().find(|(c, _)| (c - z).norm() <= ut) {
            Some(c) => c.1 += 1,
            None => unit.push((*z, 1)),
        }
    }
    let bj = &blocks[j];
    let eye = CMat::identity(n, n);
    let mut parts: Vec<CMat> = Vec::new();
    let mut tail = eye.clone();
    for &(lam, mult) in &unit {
        let shifted = bj - &eye * lam;
        let e = dense::null_space(&shifted, tol.rank_tol.max(1e3 * f64::EPSILON));
        if e.ncols() != mult {
            return Err(Stall::Hypothesis(format!(
                "unit-modulus eigenvalue {lam:.6} of block {} is not semisimple",
                ids[j]
            )));
        }
        parts.push(e);
        tail *= shifted;
    }
    let rest = dense::range_basis(&tail, tol.rank_tol);
    let dims: Vec<usize> = parts.iter().map(|e| e.ncols()).chain([rest.ncols()]).collect();
    if dims.iter().sum::<usize>() != n {
        return Err(Stall::Numeric);
    }
    let cols: Vec<_> = parts.iter().chain([&rest]).flat_map(|e| e.column_iter().map(|c| c.into_owned())).collect();
    let p = CMat::from_columns(&cols);
    if dense::condition_number(&p) > MAX_SPLIT_COND {
        return Err(Stall::Numeric);
    }
    let pinv = p.clone().try_inverse().ok_or(Stall::Numeric)?;

    // every block must be block diagonal in the split basis
    let mut starts = vec![0];
    for d in &dims {
        starts.push(starts.last().unwrap() + d);
    }
    for b in blocks {
        let full = &pinv * b * &p;
        let mut off = full.clone();
        for w in starts.windows(2) {
            off.view_mut((w[0], w[0]), (w[1] - w[0], w[1] - w[0])).fill(Complex64::new(0.0, 0.0));
        }
        if off.norm() > 1e3 * ut * b.norm().max(1.0) {
            return Err(Stall::Numeric);
        }
    }

    let mut vprime = CMat::zeros(n, n);
    for (k, w) in starts.windows(2).enumerate() {
        let range = w[0]..w[1];
        if range.is_empty() {
            continue;
        }
        let on_unit = k < parts.len();
        let (sub, sub_ids): (Vec<CMat>, Vec<usize>) = blocks
            .iter()
            .zip(ids)
            .enumerate()
            .filter(|(i, _)| !(on_unit && *i == j))
            .map(|(_, (b, &id))| (restrict(&pinv, b, &p, range.clone()), id))
            .unzip();
        let d = range.len();
        let vk = if sub.is_empty() { CMat::identity(d, d) } else { reduce(&sub, &sub_ids, tol, doublings, splits)? };
        vprime.view_mut((range.start, range.start), (d, d)).copy_from(&vk);
    }
    let v = pinv.adjoint() * vprime * &pinv;
    Ok((&v + v.adjoint()) * Complex64::new(0.5, 0.0))
}

fn residuals(v: &DMatrix<f64>, blocks: &[DMatrix<f64>]) -> Vec<f64> {
    blocks.iter().map(|b| dense::sym_min_eig(&(v - b.transpose() * v * b))).collect()
}

fn finish(v: DMatrix<f64>, blocks: &[DMatrix<f64>], method: LyapunovMethod, splits: Vec<usize>) -> LyapunovCertificate {
    if v.nrows() == 0 {
        return LyapunovCertificate { v, residuals: vec![0.0; blocks.len()], method, min_eig: 1.0, splits };
    }
    let v = (&v + v.transpose()) * 0.5;
    let lo = dense::sym_min_eig(&v);
    let v = if lo > 0.0 { v / lo } else { v };
    let min_eig = dense::sym_min_eig(&v);
    let residuals = residuals(&v, blocks);
    LyapunovCertificate { v, residuals, method, min_eig, splits }
}

fn threshold(v: &DMatrix<f64>, tol: &ToleranceConfig) -> f64 {
    tol.geom_tol * dense::norm2(v).max(1.0)
}

/// Alternating projections between `{V ⪰ I}` and the violated half-spaces `uᵀ(V − BᵀVB)u ≥ 0`.
pub fn projection_lyapunov(blocks: &[DMatrix<f64>], tol: &ToleranceConfig) -> Result<LyapunovCertificate> {
    let n = blocks.first().map_or(0, |b| b.nrows());
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut clean = true;
        for b in blocks {
            let g = &v - b.transpose() * &v * b;
            let eig = nalgebra::SymmetricEigen::new((&g + g.transpose()) * 0.5);
            let thr = 0.5 * threshold(&v, tol);
            for (k, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam >= -thr {
                    continue;
                }
                clean = false;
                let u = eig.eigenvectors.column(k);
                let bu = b * u;
                let c = u * u.transpose() - &bu * bu.transpose();
                let cn = c.norm_squared();
                if cn > 0.0 {
                    let g_now = v.component_mul(&c).sum();
                    if g_now < 0.0 {
                        v += c * (-g_now / cn);
                    }
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new((&v + v.transpose()) * 0.5);
        let clipped = eig.eigenvalues.map(|x| x.max(1.0));
        v = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        if clean {
            let cert = finish(v, blocks, LyapunovMethod::Projection, Vec::new());
            if cert.holds(threshold(&cert.v, tol)) {
                return Ok(cert);
            }
            v = cert.v;
        }
    }
    Err(Error::ProjectionNotConverged(MAX_SWEEPS))
}

/// Common `V ≻ 0` with `V − B_jᵀVB_j ⪰ 0`: nested series when every block is a strict contraction,
/// otherwise the unit-circle reduction, then the projection fallback.
pub fn common_lyapunov(blocks: &[DMatrix<f64>], tol: &ToleranceConfig, doublings: Option<u32>) -> Result<LyapunovCertificate> {
    let n = blocks.first().map_or(0, |b| b.nrows());
    if let Some(b) = blocks.iter().find(|b| b.nrows() != n || b.ncols() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
    }
    if n == 0 || blocks.is_empty() {
        let v = DMatrix::identity(n, n);
        return Ok(finish(v, blocks, LyapunovMethod::Series, Vec::new()));
    }
    let cblocks: Vec<CMat> = blocks.iter().map(dense::to_complex).collect();
    let ids: Vec<usize> = (0..blocks.len()).collect();
    let mut splits = Vec::new();
    match reduce(&cblocks, &ids, tol, doublings.unwrap_or(DEFAULT_DOUBLINGS), &mut splits) {
        Ok(vc) => {
            let method = if splits.is_empty() { LyapunovMethod::Series } else { LyapunovMethod::Reduction };
            let v = vc.map(|z| 2.0 * z.re);
            let cert = finish(v, blocks, method, splits);
            if cert.holds(threshold(&cert.v, tol)) {
                Ok(cert)
            } else {
                projection_lyapunov(blocks, tol)
            }
        }
        Err(Stall::Hypothesis(s)) => Err(Error::HypothesisViolated(s)),
        Err(Stall::Numeric) => projection_lyapunov(blocks, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_iterator(rows.len(), rows[0].len(), rows.iter().flat_map(|r| r.iter().copied()))
    }

    #[test]
    fn strict_contraction_uses_series() {
        let b = m(&[&[0.5, 0.3], &[0.0, 0.4]]);
        let c = common_lyapunov(std::slice::from_ref(&b), &t(), None).unwrap();
        assert_eq!(c.method, LyapunovMethod::Series);
        // independent residual
        let r = dense::sym_min_eig(&(&c.v - b.transpose() * &c.v * &b));
        assert!(r >= -1e-9);
        assert!((c.min_eig - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_neutral() {
        let (co, si) = (0.7f64.cos(), 0.7f64.sin());
        let r = m(&[&[co, -si], &[si, co]]);
        let c = common_lyapunov(&[r], &t(), None).unwrap();
        assert_eq!(c.method, LyapunovMethod::Reduction);
        assert!((&c.v - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert!(c.residuals[0].abs() < 1e-12);
    }

    #[test]
    fn jordan_block_violates_hypothesis() {
        let j = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(common_lyapunov(&[j], &t(), None), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn mixed_unit_and_contracting() {
        let a = m(&[&[-1.0, 0.0, 0.0], &[0.0, 0.5, 0.2], &[0.0, 0.0, 0.3]]);
        let b = m(&[&[0.4, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let c = common_lyapunov(&[a.clone(), b.clone()], &t(), None).unwrap();
        assert!(c.holds(1e-9));
        assert_eq!(c.splits.first(), Some(&0));
    }

    #[test]
    fn projection_finds_certificate() {
        let b = m(&[&[0.5, 0.3], &[0.0, 0.4]]);
        let c = projection_lyapunov(std::slice::from_ref(&b), &t()).unwrap();
        assert_eq!(c.method, LyapunovMethod::Projection);
        assert!(dense::sym_min_eig(&(&c.v - b.transpose() * &c.v * &b)) >= -1e-8);
    }

    #[test]
    fn empty_blocks() {
        let c = common_lyapunov(&[DMatrix::zeros(0, 0)], &t(), None).unwrap();
        assert_eq!(c.v.nrows(), 0);
    }
}
