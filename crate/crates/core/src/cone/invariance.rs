use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ConeRep, PolyhedralCone, QuadraticCone};
use crate::error::{Error, Result};
use crate::linalg::{dense, eigen::raw_eigenvalues, SquareMatrix, ToleranceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvarianceMethod {
    /// Every generator image checked for membership.
    GeneratorMapping,
    /// `AᵀQA − ρ²Q ⪯ 0` together with the axis sign condition.
    RhoCertificate,
    /// `AᵀQA − μQ ⪯ 0` for a searched multiplier `μ ≥ 0`.
    SLemma,
    /// Deterministic boundary sampling.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InvarianceReport {
    pub invariant: bool,
    /// Largest relative violation found (0 when none).
    pub worst_violation: f64,
    /// Index of the generator (or boundary sample) realizing the worst violation.
    pub worst_generator: Option<usize>,
    pub method: InvarianceMethod,
    /// Multiplier used in the quadratic certificate.
    pub multiplier: Option<f64>,
}

/// Number of deterministic boundary samples in the quadratic fallback.
pub const BOUNDARY_SAMPLES: usize = 10_000;

pub fn is_invariant(k: &ConeRep, a: &SquareMatrix, tol: &ToleranceConfig) -> Result<InvarianceReport> {
    if a.dim() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: a.dim() });
    }
    match k {
        ConeRep::Polyhedral(p) => Ok(polyhedral_invariance(p, a.as_matrix(), tol)),
        ConeRep::Quadratic(q) => Ok(quadratic_invariance(q, a.as_matrix(), tol)),
    }
}

pub fn polyhedral_invariance(k: &PolyhedralCone, a: &DMatrix<f64>, tol: &ToleranceConfig) -> InvarianceReport {
    let scale = a.norm();
    let mut worst = 0.0;
    let mut worst_idx = None;
    for (i, g) in k.generators.iter().enumerate() {
        let w = a * g;
        let wn = w.norm();
        if wn <= 1e-14 * scale {
            continue;
        }
        let rel = k.distance(&w) / wn;
        if rel > worst {
            worst = rel;
            worst_idx = Some(i);
        }
    }
    InvarianceReport {
        invariant: worst <= tol.geom_tol,
        worst_violation: worst,
        worst_generator: worst_idx,
        method: InvarianceMethod::GeneratorMapping,
        multiplier: None,
    }
}

fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    raw_eigenvalues(a)
        .map(|ev| ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .unwrap_or_else(|_| dense::norm2(a))
}

/// `λmax(AᵀQA − ρ(A)²Q)`, unnormalized.
pub fn rho_certificate(k: &QuadraticCone, a: &DMatrix<f64>) -> f64 {
    let q = k.ambient_form();
    let rho = spectral_radius(a);
    dense::sym_max_eig(&(a.transpose() * &q * a - &q * (rho * rho)))
}

pub fn quadratic_invariance(k: &QuadraticCone, a: &DMatrix<f64>, tol: &ToleranceConfig) -> InvarianceReport {
    let g = tol.geom_tol;
    let anorm = dense::norm2(a);
    if anorm == 0.0 {
        return InvarianceReport {
            invariant: true,
            worst_violation: 0.0,
            worst_generator: None,
            method: InvarianceMethod::RhoCertificate,
            multiplier: Some(0.0),
        };
    }
    let q = k.ambient_form();
    let qnorm = dense::norm2(&q);
    let scale = anorm * anorm * qnorm;
    let aqa = a.transpose() * &q * a;
    let f = |mu: f64| dense::sym_max_eig(&(&aqa - &q * mu)) / scale;

    // axis sign condition: Aᵀx in the dual cone
    let u = a.transpose() * &k.axis / anorm;
    let (d, w) = k.dual_coordinates(&u);
    let sign_gap = (-d).max(w - d * d).max(0.0);

    let rho = spectral_radius(a);
    let mut mu = rho * rho;
    let mut lam = f(mu);
    let mut method = InvarianceMethod::RhoCertificate;
    if lam > g {
        let (mut lo, mut hi) = (0.0, anorm * anorm * qnorm);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..90 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2);
            }
        }
        let (m_best, l_best) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if l_best < lam {
            mu = m_best;
            lam = l_best;
            method = InvarianceMethod::SLemma;
        }
    }
    let violation = lam.max(sign_gap).max(0.0);
    if violation <= g {
        return InvarianceReport {
            invariant: true,
            worst_violation: violation,
            worst_generator: None,
            method,
            multiplier: Some(mu),
        };
    }
    if violation > 10.0 * g {
        return InvarianceReport {
            invariant: false,
            worst_violation: violation,
            worst_generator: None,
            method,
            multiplier: Some(mu),
        };
    }
    sampled_invariance(k, a, tol)
}

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101,
    103, 107, 109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// Deterministic quasi-uniform points on the unit sphere of `R^m` (Halton + Box–Muller).
pub fn sphere_points(m: usize, count: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count);
    if m == 0 {
        return out;
    }
    if m == 1 {
        for i in 0..count {
            out.push(DVector::from_element(1, if i % 2 == 0 { 1.0 } else { -1.0 }));
        }
        return out;
    }
    let pairs = m.div_ceil(2);
    let mut idx: u64 = 1;
    while out.len() < count {
        let mut z = DVector::zeros(m);
        for p in 0..pairs {
            let u1 = radical_inverse(idx, PRIMES[(2 * p) % 32]).max(1e-300);
            let u2 = radical_inverse(idx, PRIMES[(2 * p + 1) % 32]);
            let r = (-2.0 * u1.ln()).sqrt();
            let t = 2.0 * std::f64::consts::PI * u2;
            z[2 * p] = r * t.cos();
            if 2 * p + 1 < m {
                z[2 * p + 1] = r * t.sin();
            }
        }
        idx += 1;
        let n = z.norm();
        if n > 0.0 {
            out.push(z / n);
        }
    }
    out
}

/// Boundary points `x + B·V^{-1/2}s` for deterministic unit vectors `s`.
pub fn boundary_points(k: &QuadraticCone, count: usize) -> Vec<DVector<f64>> {
    let m = k.dim - 1;
    if m == 0 {
        return vec![k.axis.clone()];
    }
    let eig = nalgebra::SymmetricEigen::new(k.form.clone());
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    sphere_points(m, count)
        .into_iter()
        .map(|s| &k.axis + &k.complement_basis * (&inv_sqrt * s))
        .collect()
}

pub fn sampled_invariance(k: &QuadraticCone, a: &DMatrix<f64>, tol: &ToleranceConfig) -> InvarianceReport {
    let mut pts = boundary_points(k, BOUNDARY_SAMPLES);
    pts.push(k.axis.clone());
    let mut worst = 0.0;
    let mut worst_idx = None;
    for (i, p) in pts.iter().enumerate() {
        let w = a * p;
        let wn = w.norm();
        if wn == 0.0 {
            continue;
        }
        let r = k.contains(&w, tol).expect("dimension checked");
        if !r.inside {
            let rel = r.distance / wn;
            if rel >= worst {
                worst = rel;
                worst_idx = Some(i);
            }
        }
    }
    InvarianceReport {
        invariant: worst_idx.is_none(),
        worst_violation: worst,
        worst_generator: worst_idx,
        method: InvarianceMethod::Sampled,
        multiplier: None,
    }
}
