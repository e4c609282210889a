//! Common invariant cones of simultaneously diagonalizable families of any size.

pub mod closure;
pub mod dominant;
pub mod form;

pub use closure::{construct_simdiag_cone, invariance_defect, SimDiagCone, DEFAULT_WORD_LEN};
pub use dominant::{dominant_index_set, exponent_tuples, omega_and_p, DominantIndexSet, DEFAULT_BOUND};
pub use form::{simultaneous_diagonalize, SimDiagForm};

use crate::cone::{is_invariant, ConeRep};
use crate::decision::{Certificate, FailedCondition, FamilyDecision, MemberCheck};
use crate::error::{Error, Result};
use crate::linalg::{SquareMatrix, ToleranceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimDiagOptions {
    pub bound: u32,
    pub word_len: u32,
    pub seed: u64,
}

impl Default for SimDiagOptions {
    fn default() -> Self {
        SimDiagOptions { bound: DEFAULT_BOUND, word_len: DEFAULT_WORD_LEN, seed: 0 }
    }
}

/// Decides the commuting diagonalizable case by the sign condition on the dominant index set.
pub fn decide_simdiag(family: &[SquareMatrix], tol: &ToleranceConfig, opts: &SimDiagOptions) -> Result<FamilyDecision> {
    let method = "simdiag";
    let form = simultaneous_diagonalize(family, tol, opts.seed)?;
    let dominant = match dominant_index_set(&form, opts.bound, tol) {
        Ok(d) => d,
        Err(Error::NonVandergraftProduct { tuple }) => {
            let mut c = Certificate::failing(method, FailedCondition::NonVandergraftProduct, vec![]);
            c.tuple = Some(tuple);
            return Ok(FamilyDecision::no(c));
        }
        Err(e) => return Err(e),
    };
    let slack = tol.eig_cluster_tol;
    for (k, &i) in dominant.indices.iter().enumerate() {
        for j in 0..family.len() {
            let l = form.lambda[i][j];
            let scale = l.norm().max(1.0);
            if l.im.abs() > slack * scale || l.re < -slack * scale {
                let mut c = Certificate::failing(method, FailedCondition::NegativeEigenvalueOnDominantIndex, vec![j]);
                c.index = Some(i);
                c.tuple = Some(dominant.witnesses[k].clone());
                c.notes.push(format!("eigenvalue {:.6} of member {j} on dominant block {i}", l));
                return Ok(FamilyDecision::no(c));
            }
        }
    }
    // a larger bound can only enlarge the set; the construction uses the finer one
    let dominant = if opts.word_len > opts.bound && !dominant.exact {
        dominant_index_set(&form, opts.word_len, tol)?
    } else {
        dominant
    };
    let built = construct_simdiag_cone(family, &form, &dominant, opts.word_len, tol)?;
    let mut cert = Certificate::new(method);
    if !dominant.exact {
        cert.flag("verified-to-bound-M");
    }
    if built.defect > tol.geom_tol {
        cert.flag("truncated-closure");
    }
    cert.notes.push(format!(
        "dominant blocks {:?}, word length {}, invariance defect {:.3e}",
        dominant.indices, built.word_len, built.defect
    ));
    let witness = ConeRep::Polyhedral(built.cone);
    for (i, a) in family.iter().enumerate() {
        cert.checks.push(MemberCheck { member: i, report: is_invariant(&witness, a, tol)? });
    }
    Ok(FamilyDecision::yes(witness, cert))
}
