use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::eigen::{eigen_decompose, Spectrum, DEFECT_RADIUS, PARALLEL_SINE};
use super::{vec_serde, SquareMatrix, ToleranceConfig};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VandergraftFailure {
    None,
    RhoNotEigenvalue,
    DegreeViolation,
}

impl VandergraftFailure {
    pub fn as_str(&self) -> &'static str {
        match self {
            VandergraftFailure::None => "none",
            VandergraftFailure::RhoNotEigenvalue => "rho-not-eigenvalue",
            VandergraftFailure::DegreeViolation => "degree-violation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VandergraftReport {
    pub is_vandergraft: bool,
    pub dominant_eigenvalue: Option<f64>,
    #[serde(with = "vec_serde::opt_list")]
    pub dominant_eigenvectors: Option<Vec<DVector<f64>>>,
    pub failed_condition: VandergraftFailure,
    pub spectral_radius: f64,
    /// A degree decision was close to the rank cutoff.
    pub near_defective: bool,
}

/// Spectral test: ρ is an eigenvalue whose degree dominates the degree of
/// every eigenvalue of modulus ρ.
pub fn spectral_test(spec: &Spectrum, tol: &ToleranceConfig) -> VandergraftFailure {
    let Some(top) = spec.rho_eigenvalue(tol) else {
        return VandergraftFailure::RhoNotEigenvalue;
    };
    if spec.peripheral(tol).any(|e| e.degree > top.degree) {
        VandergraftFailure::DegreeViolation
    } else {
        VandergraftFailure::None
    }
}

/// Closed form for 2×2: `tr² ≥ 4 det` and `tr ≥ 0`, both up to the cluster radius.
/// Whether the two eigenvalues of a 2×2 matrix count as one: they lie within the cluster
/// radius, or within the defect radius with nearly parallel eigenvectors.
pub fn double_eigenvalue_2x2(a: &SquareMatrix, tol: &ToleranceConfig) -> bool {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let disc = (p - s) * (p - s) + 4.0 * q * r;
    let half = 0.5 * disc.abs().sqrt();
    let tr = p + s;
    let rho = (0.5 * tr).abs() + half;
    let scale = rho.max(1.0);
    let d = 0.5 * (p - s);
    let m_norm = (2.0 * d * d + q * q + r * r).sqrt();
    half <= tol.eig_cluster_tol * scale || (half <= DEFECT_RADIUS * scale && half <= PARALLEL_SINE * m_norm)
}

/// Closed form for 2×2: real spectrum with a nonnegative trace.
pub fn v2_test(a: &SquareMatrix, tol: &ToleranceConfig) -> bool {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let tr = p + s;
    let det = p * s - q * r;
    let disc = (p - s) * (p - s) + 4.0 * q * r;
    let rho = if disc >= 0.0 {
        let d = disc.sqrt();
        (0.5 * (tr + d)).abs().max((0.5 * (tr - d)).abs())
    } else {
        det.abs().sqrt()
    };
    let tolc = tol.eig_cluster_tol * rho.max(1.0);
    (disc >= 0.0 || double_eigenvalue_2x2(a, tol)) && tr >= -tolc
}

pub fn is_vandergraft(a: &SquareMatrix, tol: &ToleranceConfig) -> Result<VandergraftReport> {
    let spec = eigen_decompose(a, tol)?;
    Ok(report_from_spectrum(a, &spec, tol))
}

pub fn report_from_spectrum(a: &SquareMatrix, spec: &Spectrum, tol: &ToleranceConfig) -> VandergraftReport {
    let failed = if a.dim() == 2 {
        if v2_test(a, tol) {
            VandergraftFailure::None
        } else {
            VandergraftFailure::RhoNotEigenvalue
        }
    } else {
        spectral_test(spec, tol)
    };
    let ok = failed == VandergraftFailure::None;
    let top = if ok { spec.rho_eigenvalue(tol) } else { None };
    let ok = ok && top.is_some();
    VandergraftReport {
        is_vandergraft: ok,
        dominant_eigenvalue: top.filter(|_| ok).map(|e| e.re),
        dominant_eigenvectors: top.filter(|_| ok).map(|e| e.eigenvectors.clone()),
        failed_condition: if ok { VandergraftFailure::None } else if failed == VandergraftFailure::None {
            VandergraftFailure::RhoNotEigenvalue
        } else {
            failed
        },
        spectral_radius: spec.spectral_radius,
        near_defective: spec.near_defective,
    }
}
