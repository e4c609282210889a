//! Eigen-frames of 2×2 matrices and the single-matrix invariant cone catalog.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cone::{PolyhedralCone, ProperReport};
use crate::error::{Error, Result};
use crate::linalg::vandergraft::{double_eigenvalue_2x2, v2_test};
use crate::linalg::{dense, SquareMatrix, ToleranceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind2 {
    DiagNonneg,
    NonDiag,
    NegDet,
    NotVandergraft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EigenFrame2 {
    pub kind: Kind2,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(with = "opt_vec", default)]
    pub u1: Option<DVector<f64>>,
    #[serde(with = "opt_vec", default)]
    pub u2: Option<DVector<f64>>,
    /// For `NonDiag`: a vector positively associated with `u1`.
    #[serde(with = "opt_vec", default)]
    pub orientation_ref: Option<DVector<f64>>,
    pub scalar: bool,
}

mod opt_vec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<DVector<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|x| x.as_slice().to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DVector<f64>>, D::Error> {
        Ok(Option::<Vec<f64>>::deserialize(d)?.map(DVector::from_vec))
    }
}

impl EigenFrame2 {
    pub fn is_vandergraft(&self) -> bool {
        self.kind != Kind2::NotVandergraft
    }

    /// Non-scalar Vandergraft matrix: has a well-defined dominant line.
    pub fn has_dominant_line(&self) -> bool {
        self.is_vandergraft() && !self.scalar
    }
}

pub fn perp(v: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![-v[1], v[0]])
}

pub fn cross(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `|sin ∠(a, b)|`.
pub fn line_sine(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let n = a.norm() * b.norm();
    if n == 0.0 {
        0.0
    } else {
        (cross(a, b) / n).abs()
    }
}

pub fn same_line(a: &DVector<f64>, b: &DVector<f64>, tol: &ToleranceConfig) -> bool {
    line_sine(a, b) <= tol.geom_tol
}

/// Angle of the line through `v`, in `[0, π)`.
pub fn line_angle(v: &DVector<f64>) -> f64 {
    let mut t = v[1].atan2(v[0]);
    if t < 0.0 {
        t += std::f64::consts::PI;
    }
    if t >= std::f64::consts::PI {
        t -= std::f64::consts::PI;
    }
    t
}

pub fn unit_at(theta: f64) -> DVector<f64> {
    DVector::from_vec(vec![theta.cos(), theta.sin()])
}

/// Unit eigenvector for `lambda`, from the larger row of `A − λI`.
fn eigvec(a: &SquareMatrix, lambda: f64) -> DVector<f64> {
    let r1 = [a[(0, 0)] - lambda, a[(0, 1)]];
    let r2 = [a[(1, 0)], a[(1, 1)] - lambda];
    let n1 = r1[0].hypot(r1[1]);
    let n2 = r2[0].hypot(r2[1]);
    let r = if n1 >= n2 { r1 } else { r2 };
    let mut v = DVector::from_vec(vec![-r[1], r[0]]);
    v = dense::unit(&v);
    dense::sign_normalize(&mut v);
    v
}

pub fn classify2(a: &SquareMatrix, tol: &ToleranceConfig) -> EigenFrame2 {
    assert_eq!(a.dim(), 2, "classify2 expects a 2x2 matrix");
    let tr = a.trace();
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let empty = |kind, l1, l2, scalar| EigenFrame2 {
        kind,
        lambda1: l1,
        lambda2: l2,
        u1: None,
        u2: None,
        orientation_ref: None,
        scalar,
    };
    if let Some(c) = a.scalar_value(tol.geom_tol) {
        let kind = if c >= 0.0 { Kind2::DiagNonneg } else { Kind2::NotVandergraft };
        return empty(kind, c, c, true);
    }
    if !v2_test(a, tol) {
        let l = 0.5 * tr;
        return empty(Kind2::NotVandergraft, l, l, false);
    }
    let diff = a[(0, 0)] - a[(1, 1)];
    let disc = (diff * diff + 4.0 * a[(0, 1)] * a[(1, 0)]).max(0.0);
    let r = disc.sqrt();
    let big = 0.5 * (tr + r);
    let rho = big.abs().max((0.5 * (tr - r)).abs());
    let tolc = tol.eig_cluster_tol * rho.max(1.0);
    if double_eigenvalue_2x2(a, tol) {
        let lambda = 0.5 * tr;
        let u = eigvec(a, lambda);
        let p = perp(&u);
        let x = associated_coefficient(a, &u, &p);
        let oref = if x > 0.0 { p } else { -p };
        return EigenFrame2 {
            kind: Kind2::NonDiag,
            lambda1: lambda,
            lambda2: lambda,
            u1: Some(u),
            u2: None,
            orientation_ref: Some(oref),
            scalar: false,
        };
    }
    let l1 = big;
    let l2 = if big != 0.0 { det / big } else { 0.5 * (tr - r) };
    let kind = if l2 < -tolc { Kind2::NegDet } else { Kind2::DiagNonneg };
    EigenFrame2 {
        kind,
        lambda1: l1,
        lambda2: l2,
        u1: Some(eigvec(a, l1)),
        u2: Some(eigvec(a, l2)),
        orientation_ref: None,
        scalar: false,
    }
}

/// The matrix with eigenpairs `(l1, u1)` and `(l2, u2)`.
pub fn from_eigenpairs(l1: f64, u1: &[f64], l2: f64, u2: &[f64]) -> Result<SquareMatrix> {
    let v = nalgebra::DMatrix::from_column_slice(2, 2, &[u1[0], u1[1], u2[0], u2[1]]);
    let inv = v.clone().try_inverse().ok_or(Error::CollinearInput)?;
    SquareMatrix::new(v * nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![l1, l2])) * inv)
}

/// Coefficient `x` in `Av = λv + x·u` with `λ = trace/2`.
pub fn associated_coefficient(a: &SquareMatrix, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let lambda = 0.5 * a.trace();
    let w = a.apply(v) - v * lambda;
    u.dot(&w) / u.norm_squared()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
        }
    }
}

/// Sign of `x` in `Av = λv + x·u` for a non-diagonalizable `A` with eigenvector `u`.
pub fn associated_sign(a: &SquareMatrix, u: &DVector<f64>, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<Sign> {
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    if same_line(u, v, tol) {
        return Err(Error::CollinearInput);
    }
    let x = associated_coefficient(a, u, v);
    Ok(if x > 0.0 {
        Sign::Positive
    } else if x < 0.0 {
        Sign::Negative
    } else {
        Sign::Zero
    })
}

/// Coordinates of `v` in the basis `(b1, b2)`.
pub fn coords(b1: &DVector<f64>, b2: &DVector<f64>, v: &DVector<f64>) -> (f64, f64) {
    let det = cross(b1, b2);
    (cross(v, b2) / det, cross(b1, v) / det)
}

fn two_generators(k: &PolyhedralCone, tol: &ToleranceConfig) -> Result<(DVector<f64>, DVector<f64>)> {
    if k.dim != 2 || k.generators.len() != 2 {
        return Err(Error::ImproperCone("expected a 2D cone with two generators".into()));
    }
    let rep: ProperReport = k.is_proper(tol);
    if !rep.proper {
        return Err(Error::ImproperCone(rep.diagnosis));
    }
    Ok((k.generators[0].clone(), k.generators[1].clone()))
}

/// Invariance of a proper two-generator cone, decided by the per-kind characterization.
pub fn is_invariant_cone_2x2(a: &SquareMatrix, k: &PolyhedralCone, tol: &ToleranceConfig) -> Result<bool> {
    let (g1, g2) = two_generators(k, tol)?;
    let f = classify2(a, tol);
    let g = tol.geom_tol;
    match f.kind {
        Kind2::NotVandergraft => Ok(false),
        _ if f.scalar => Ok(true),
        Kind2::DiagNonneg => {
            let u1 = f.u1.expect("frame has u1");
            let u2 = f.u2.expect("frame has u2");
            let (a1, b1) = coords(&g1, &g2, &u1);
            let has_u1 = (a1 >= -g && b1 >= -g) || (a1 <= g && b1 <= g);
            let (a2, b2) = coords(&g1, &g2, &u2);
            let u2_interior = (a2 > g && b2 > g) || (a2 < -g && b2 < -g);
            Ok(has_u1 && !u2_interior)
        }
        Kind2::NonDiag => {
            let u = f.u1.expect("frame has u1");
            for (edge, other) in [(&g1, &g2), (&g2, &g1)] {
                if same_line(edge, &u, tol) {
                    return Ok(associated_sign(a, edge, other, tol)? == Sign::Positive);
                }
            }
            Ok(false)
        }
        Kind2::NegDet => {
            let u1 = f.u1.expect("frame has u1");
            let u2 = f.u2.expect("frame has u2");
            let (a1, c1) = coords(&u1, &u2, &g1);
            let (a2, c2) = coords(&u1, &u2, &g2);
            if a1 * a2 <= 0.0 {
                return Ok(false);
            }
            let (mut c1, mut c2) = (c1 / a1, c2 / a2);
            if c1 < c2 {
                std::mem::swap(&mut c1, &mut c2);
            }
            if !(c1 > g && c2 < -g) {
                return Ok(false);
            }
            let r = c1 / c2;
            let lo = f.lambda1 / f.lambda2;
            let hi = f.lambda2 / f.lambda1;
            let slack = g * (1.0 + r.abs());
            Ok(r >= lo - slack && r <= hi + slack)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VAvCone {
    pub cone: PolyhedralCone,
    pub proper: bool,
}

/// `Cone{v, Av}` for `det A ≤ 0 ≤ trace A`.
pub fn make_invariant_cone(a: &SquareMatrix, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<VAvCone> {
    if a.dim() != 2 || v.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: v.len().max(a.dim()) });
    }
    let scale = a.norm();
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    if det > tol.geom_tol * scale * scale || a.trace() < -tol.geom_tol * scale {
        return Err(Error::PreconditionFailed("requires det A <= 0 and trace A >= 0".into()));
    }
    if v.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let av = a.apply(v);
    let gens = if av.norm() <= 1e-14 * scale * v.norm() { vec![v.clone()] } else { vec![v.clone(), av] };
    let cone = PolyhedralCone::new(2, gens)?;
    let proper = cone.is_proper(tol).proper;
    Ok(VAvCone { cone, proper })
}
