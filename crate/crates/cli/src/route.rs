//! Picks a decision procedure for a family and runs it.

use conelab::cones2d::decide_common_2x2;
use conelab::linalg::{is_vandergraft, ToleranceConfig};
use conelab::shared::{common_dominant_eigenvector, decide_shared_dominant};
use conelab::simdiag::form::{check_commuting, check_diagonalizable};
use conelab::simdiag::{decide_simdiag, SimDiagOptions};
use conelab::{Certificate, Error, FailedCondition, FamilyDecision, Hypothesis};

use crate::schema::{Family, Route};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Auto,
    #[value(name = "2x2")]
    TwoByTwo,
    Simdiag,
    SharedDominant,
}

#[derive(Clone, Copy, Debug)]
pub struct RouteOptions {
    pub method: Method,
    pub simdiag: SimDiagOptions,
    pub tol: ToleranceConfig,
}

fn undecided(method: &str, hypothesis: Option<Hypothesis>, note: String) -> FamilyDecision {
    let mut c = Certificate::new(method);
    c.hypothesis = hypothesis;
    c.notes.push(note);
    FamilyDecision::undecided(c)
}

/// Errors that mean the input itself is unusable.
pub fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::NotSquare { .. }
            | Error::EmptyMatrix
            | Error::NonFinite(..)
            | Error::DimensionTooLarge(_)
            | Error::DimensionMismatch { .. }
            | Error::EmptyInput
            | Error::EmptyFamily
    )
}

fn run_shared(family: &Family, tol: &ToleranceConfig) -> Result<FamilyDecision, Error> {
    match decide_shared_dominant(&family.members, family.similarity.as_ref(), tol) {
        Ok(d) => Ok(d),
        Err(Error::HypothesesNotMet(h)) => Ok(undecided(
            "shared-dominant",
            Some(h),
            "hypotheses of the sufficient construction not met; this is not a proof that no cone exists".into(),
        )),
        Err(e) if is_input_error(&e) => Err(e),
        Err(e) => Ok(undecided("shared-dominant", None, format!("construction failed: {e}"))),
    }
}

fn run_simdiag(family: &Family, opts: &RouteOptions) -> Result<FamilyDecision, Error> {
    match decide_simdiag(&family.members, &opts.tol, &opts.simdiag) {
        Ok(d) => Ok(d),
        Err(Error::NotCommuting(i, j)) => Ok(undecided(
            "simdiag",
            Some(Hypothesis::NotCommuting { first: i, second: j }),
            "family is not commuting".into(),
        )),
        Err(e) if is_input_error(&e) => Err(e),
        Err(e) => Ok(undecided("simdiag", None, format!("not applicable: {e}"))),
    }
}

fn simdiag_applies(family: &Family, tol: &ToleranceConfig) -> bool {
    let ct = (100.0 * tol.eig_cluster_tol).max(tol.geom_tol);
    check_commuting(&family.members, ct).is_ok() && check_diagonalizable(&family.members, tol).is_ok()
}

pub fn decide(family: &Family, opts: &RouteOptions) -> Result<(Route, FamilyDecision), Error> {
    let tol = &opts.tol;
    let n = family.members[0].dim();
    match opts.method {
        Method::TwoByTwo => {
            if n != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: n });
            }
            Ok((Route::TwoByTwo, decide_common_2x2(&family.members, tol)?))
        }
        Method::Simdiag => Ok((Route::Simdiag, run_simdiag(family, opts)?)),
        Method::SharedDominant => Ok((Route::SharedDominant, run_shared(family, tol)?)),
        Method::Auto => {
            if n == 2 {
                return Ok((Route::TwoByTwo, decide_common_2x2(&family.members, tol)?));
            }
            for (i, a) in family.members.iter().enumerate() {
                let rep = is_vandergraft(a, tol)?;
                if !rep.is_vandergraft {
                    let mut c = Certificate::failing("vandergraft", FailedCondition::NotVandergraft, vec![i]);
                    c.notes.push(format!("member {i}: {}", rep.failed_condition.as_str()));
                    return Ok((Route::NoneApplicable, FamilyDecision::no(c)));
                }
            }
            if simdiag_applies(family, tol) {
                return Ok((Route::Simdiag, run_simdiag(family, opts)?));
            }
            if common_dominant_eigenvector(&family.members, tol).is_some() {
                return Ok((Route::SharedDominant, run_shared(family, tol)?));
            }
            Ok((
                Route::NoneApplicable,
                undecided("none", None, "no applicable decision procedure for this family".into()),
            ))
        }
    }
}
