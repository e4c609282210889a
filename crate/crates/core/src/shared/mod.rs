//! Quadratic witness cones for families sharing a dominant eigenvector.

pub mod deflate;
pub mod lyapunov;

pub use deflate::{check_commuting, deflate, DeflatedFamily};
pub use lyapunov::{common_lyapunov, projection_lyapunov, LyapunovCertificate, LyapunovMethod};

use nalgebra::{DMatrix, DVector};

use crate::cone::invariance::rho_certificate;
use crate::cone::{is_invariant, ConeRep, QuadraticCone};
use crate::decision::{Certificate, FamilyDecision, MemberCheck};
use crate::error::{Error, Hypothesis, Result};
use crate::linalg::{dense, eigen::raw_eigenvalues, family_dim, is_vandergraft, SquareMatrix, ToleranceConfig};

fn eigvec_tol(tol: &ToleranceConfig) -> f64 {
    100.0 * tol.eig_cluster_tol
}

/// Intersection of the dominant eigenspaces; the unit vector closest to the first best-aligned
/// coordinate axis, with its first significant entry positive.
pub fn common_dominant_eigenvector(family: &[SquareMatrix], tol: &ToleranceConfig) -> Option<DVector<f64>> {
    let n = family_dim(family).ok()?;
    let mut u = DMatrix::<f64>::identity(n, n);
    for a in family {
        let rep = is_vandergraft(a, tol).ok()?;
        let vecs = rep.dominant_eigenvectors?;
        if vecs.is_empty() {
            return None;
        }
        let w = dense::range_basis(&DMatrix::from_columns(&vecs), eigvec_tol(tol));
        let k = u.ncols();
        let mut joint = DMatrix::zeros(n, k + w.ncols());
        joint.view_mut((0, 0), (n, k)).copy_from(&u);
        joint.view_mut((0, k), (n, w.ncols())).copy_from(&(-&w));
        let null = dense::null_space(&joint, eigvec_tol(tol));
        if null.ncols() == 0 {
            return None;
        }
        let coeffs = null.view((0, 0), (k, null.ncols())).into_owned();
        u = dense::range_basis(&(&u * coeffs), eigvec_tol(tol));
        if u.ncols() == 0 {
            return None;
        }
    }
    // projections of the coordinate axes; the first longest one wins
    let proj = &u * u.transpose();
    let mut best = 0;
    for i in 1..n {
        if proj.column(i).norm() > proj.column(best).norm() + 1e-12 {
            best = i;
        }
    }
    let mut x = dense::unit(&proj.column(best).into_owned());
    x.apply(|v| {
        if v.abs() < 1e-14 {
            *v = 0.0
        }
    });
    let mut x = dense::unit(&x);
    dense::sign_normalize(&mut x);
    Some(x)
}

fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(raw_eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn certify(
    family: &[SquareMatrix],
    cone: QuadraticCone,
    x: &DVector<f64>,
    mut cert: Certificate,
    tol: &ToleranceConfig,
) -> Result<FamilyDecision> {
    let witness = ConeRep::Quadratic(cone);
    if !witness.contains(x, tol)?.interior {
        return Err(Error::WitnessVerificationFailed("shared eigenvector is not interior".into()));
    }
    for (i, a) in family.iter().enumerate() {
        let report = is_invariant(&witness, a, tol)?;
        if !report.invariant {
            return Err(Error::WitnessVerificationFailed(format!(
                "member {i} violates invariance by {:.3e}",
                report.worst_violation
            )));
        }
        cert.checks.push(MemberCheck { member: i, report });
    }
    Ok(FamilyDecision::yes(witness, cert))
}

/// Lorentz cone about `x`, after conjugating by `similarity` when one is supplied.
pub fn ice_cream_cone(
    family: &[SquareMatrix],
    x: &DVector<f64>,
    similarity: Option<&SquareMatrix>,
    tol: &ToleranceConfig,
) -> Result<FamilyDecision> {
    let n = family_dim(family)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let (t, tinv) = match similarity {
        Some(t) => {
            if t.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: t.dim() });
            }
            let inv = t.as_matrix().clone().try_inverse().ok_or(Error::Singular)?;
            (t.as_matrix().clone(), inv)
        }
        None => (DMatrix::identity(n, n), DMatrix::identity(n, n)),
    };
    let xp = dense::unit(&(&tinv * x));
    let mut cert = Certificate::new("shared-dominant-ice-cream");
    for (i, a) in family.iter().enumerate() {
        let ap = &tinv * a.as_matrix() * &t;
        let an = dense::norm2(&ap);
        let skew = dense::norm2(&(&ap * ap.transpose() - ap.transpose() * &ap));
        if skew > tol.eig_cluster_tol * an * an {
            return Err(Error::NotNormal(i));
        }
        let rho = spectral_radius(&ap)?;
        if (&ap * &xp - &xp * rho).norm() > 1e3 * tol.eig_cluster_tol * rho.max(1.0) {
            return Err(Error::NoSharedDominantVector);
        }
    }
    let base = QuadraticCone::ice_cream(&xp)?;
    let cone = if similarity.is_some() {
        let q = tinv.transpose() * base.ambient_form() * &tinv;
        let q = &q / dense::norm2(&q);
        cert.notes.push("cone mapped back through the supplied similarity".into());
        QuadraticCone::from_quadratic_form(&q, x)?
    } else {
        base
    };
    for (i, a) in family.iter().enumerate() {
        cert.notes.push(format!("member {i}: λmax(AᵀQA − ρ²Q) = {:.3e}", rho_certificate(&cone, a.as_matrix())));
    }
    certify(family, cone, x, cert, tol)
}

fn unmet(h: Hypothesis) -> Error {
    Error::HypothesesNotMet(h)
}

/// Sufficient construction for families with a shared dominant eigenvector: the Lorentz cone for
/// normal families, otherwise deflation plus a common Lyapunov form for commuting families.
pub fn decide_shared_dominant(
    family: &[SquareMatrix],
    similarity: Option<&SquareMatrix>,
    tol: &ToleranceConfig,
) -> Result<FamilyDecision> {
    let n = family_dim(family)?;
    let mut rhos = Vec::with_capacity(family.len());
    for (i, a) in family.iter().enumerate() {
        let rep = is_vandergraft(a, tol)?;
        if !rep.is_vandergraft {
            return Err(unmet(Hypothesis::NotVandergraft { member: i }));
        }
        rhos.push(rep.spectral_radius);
    }
    let x = common_dominant_eigenvector(family, tol).ok_or(unmet(Hypothesis::NoSharedDominantVector))?;

    let normal_failure = match ice_cream_cone(family, &x, similarity, tol) {
        Ok(d) => return Ok(d),
        Err(Error::NotNormal(i)) => i,
        Err(Error::NoSharedDominantVector) => return Err(unmet(Hypothesis::NoSharedDominantVector)),
        Err(e) => return Err(e),
    };

    match check_commuting(family, tol) {
        Err(Error::NotCommuting(i, j)) => return Err(unmet(Hypothesis::NotCommuting { first: i, second: j })),
        Err(e) => return Err(e),
        Ok(()) => {}
    }
    let mut kept = Vec::new();
    let mut scaled = Vec::new();
    for (i, a) in family.iter().enumerate() {
        if a.norm() <= tol.rank_tol {
            continue;
        }
        if rhos[i] <= tol.eig_cluster_tol * a.norm() {
            // nonzero nilpotent: ρ = 0 cannot be semisimple
            return Err(unmet(Hypothesis::NotSemisimple { member: i }));
        }
        kept.push(i);
        scaled.push(a.scale(1.0 / rhos[i]));
    }
    let mut cert = Certificate::new("shared-dominant-lyapunov");
    cert.notes.push(format!("not normal (member {normal_failure}); commuting construction"));
    let dropped: Vec<usize> = (0..family.len()).filter(|i| !kept.contains(i)).collect();
    if !dropped.is_empty() {
        cert.notes.push(format!("zero members ignored: {dropped:?}"));
    }
    if scaled.is_empty() {
        let cone = QuadraticCone::ice_cream(&x)?;
        return certify(family, cone, &x, cert, tol);
    }
    let defl = match deflate(&scaled, &x, tol) {
        Ok(d) => d,
        Err(Error::NotSemisimple(k)) => return Err(unmet(Hypothesis::NotSemisimple { member: kept[k] })),
        Err(Error::NotCommuting(a, b)) => {
            return Err(unmet(Hypothesis::NotCommuting { first: kept[a], second: kept[b] }))
        }
        Err(e) => return Err(unmet(Hypothesis::LyapunovFailed { reason: e.to_string() })),
    };
    let lyap = common_lyapunov(&defl.blocks, tol, None)
        .map_err(|e| unmet(Hypothesis::LyapunovFailed { reason: e.to_string() }))?;
    let mut d = DMatrix::zeros(n, n);
    d[(0, 0)] = -1.0;
    d.view_mut((1, 1), (n - 1, n - 1)).copy_from(&lyap.v);
    let sinv = defl.s.clone().try_inverse().ok_or(Error::Singular)?;
    let q = sinv.transpose() * d * &sinv;
    let q = &q / dense::norm2(&q);
    let cone = QuadraticCone::from_quadratic_form(&q, &x)?;
    cert.notes.push(format!(
        "lyapunov method {:?}, min eigenvalue {:.3e}, residuals {:?}, splits {:?}",
        lyap.method, lyap.min_eig, lyap.residuals, lyap.splits
    ));
    certify(family, cone, &x, cert, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::Answer;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rows(r: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn rot3(scale: f64, th: f64) -> SquareMatrix {
        let (c, s) = (th.cos(), th.sin());
        rows(&[&[2.0, 0.0, 0.0], &[0.0, scale * c, -scale * s], &[0.0, scale * s, scale * c]])
    }

    #[test]
    fn common_vector_examples() {
        let x = common_dominant_eigenvector(&[SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[3.0, 1.0])], &t());
        assert_eq!(x, Some(DVector::from_vec(vec![1.0, 0.0])));
        let x = common_dominant_eigenvector(&[rows(&[&[2.0, 0.0], &[0.0, 1.0]]), rows(&[&[2.0, 1.0], &[0.0, 1.0]])], &t());
        assert!((x.unwrap() - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-12);
        let x = common_dominant_eigenvector(&[SquareMatrix::diag(&[1.0, 2.0]), SquareMatrix::diag(&[3.0, 1.0])], &t());
        assert_eq!(x, None);
    }

    #[test]
    fn scalar_family_gets_lorentz_cone() {
        let d = decide_shared_dominant(&[SquareMatrix::scalar(3, 2.0)], None, &t()).unwrap();
        assert_eq!(d.answer, Answer::Yes);
        assert_eq!(d.certificate.method, "shared-dominant-ice-cream");
    }

    #[test]
    fn rotation_blocks_use_ice_cream() {
        let f = vec![rot3(1.0, 0.3), rot3(1.5, 1.1)];
        let d = decide_shared_dominant(&f, None, &t()).unwrap();
        assert!(d.is_yes());
        let k = d.witness.unwrap();
        let k = k.as_quadratic().unwrap();
        assert!((k.axis[0].abs() - 1.0).abs() < 1e-12);
        for a in &f {
            assert!(rho_certificate(k, a.as_matrix()) <= 1e-8);
        }
    }

    #[test]
    fn jordan_block_is_not_normal() {
        let j = rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let x = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(ice_cream_cone(&[j], &x, None, &t()), Err(Error::NotNormal(0)));
    }

    #[test]
    fn jordan_pair_is_not_semisimple() {
        let f = vec![rows(&[&[1.0, 1.0], &[0.0, 1.0]]), rows(&[&[1.0, -1.0], &[0.0, 1.0]])];
        assert_eq!(
            decide_shared_dominant(&f, None, &t()),
            Err(Error::HypothesesNotMet(Hypothesis::NotSemisimple { member: 0 }))
        );
    }

    #[test]
    fn commuting_diagonal_family_gets_ellipsoid() {
        let f = vec![SquareMatrix::diag(&[1.0, 0.5, -0.5]), SquareMatrix::diag(&[1.0, -0.3, 0.3])];
        // diagonal is normal, so break normality with a similarity that fixes e1
        let s = rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.7], &[0.0, 0.0, 1.0]]);
        let sinv = s.as_matrix().clone().try_inverse().unwrap();
        let g: Vec<SquareMatrix> =
            f.iter().map(|a| SquareMatrix::new(s.as_matrix() * a.as_matrix() * &sinv).unwrap()).collect();
        let d = decide_shared_dominant(&g, None, &t()).unwrap();
        assert!(d.is_yes());
        assert_eq!(d.certificate.method, "shared-dominant-lyapunov");
        let k = d.witness.unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(k.contains(&e1, &t()).unwrap().interior);
        // oracle: images of boundary points stay in the cone
        let q = k.as_quadratic().unwrap();
        for p in crate::cone::invariance::boundary_points(q, 500) {
            for a in &g {
                assert!(q.contains(&a.apply(&p), &t()).unwrap().inside);
            }
        }
        let d0 = decide_shared_dominant(&f, None, &t()).unwrap();
        assert!(d0.is_yes());
    }

    #[test]
    fn zero_member_is_ignored_and_nilpotent_is_not() {
        let a = rows(&[&[1.0, 1.0], &[0.0, 0.5]]);
        let z = SquareMatrix::scalar(2, 0.0);
        let d = decide_shared_dominant(&[a.clone(), z], None, &t()).unwrap();
        assert!(d.is_yes());
        let nil = rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = decide_shared_dominant(&[SquareMatrix::identity(2), nil], None, &t());
        assert!(matches!(r, Err(Error::HypothesesNotMet(_))));
    }

    #[test]
    fn scaling_keeps_answer() {
        let a = rows(&[&[1.0, 1.0], &[0.0, 0.5]]);
        let b = rows(&[&[2.0, 4.0], &[0.0, -1.0]]);
        let d1 = decide_shared_dominant(&[a.clone(), b.clone()], None, &t()).map(|d| d.answer);
        let d2 = decide_shared_dominant(&[a.scale(7.0), b.scale(0.1)], None, &t()).map(|d| d.answer);
        assert_eq!(d1, d2);
    }
}
