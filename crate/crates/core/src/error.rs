use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A hypothesis of the shared-dominant-eigenvector constructions that the input did not meet.
///
/// Failing one of these is *not* a proof that no common invariant cone exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "hypothesis", rename_all = "kebab-case")]
pub enum Hypothesis {
    NotVandergraft { member: usize },
    NoSharedDominantVector,
    NotNormal { member: usize },
    NotCommuting { first: usize, second: usize },
    NotSemisimple { member: usize },
    LyapunovFailed { reason: String },
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::NotVandergraft { member } => write!(f, "NotVandergraft(member {member})"),
            Hypothesis::NoSharedDominantVector => write!(f, "NoSharedDominantVector"),
            Hypothesis::NotNormal { member } => write!(f, "NotNormal(member {member})"),
            Hypothesis::NotCommuting { first, second } => {
                write!(f, "NotCommuting(members {first}, {second})")
            }
            Hypothesis::NotSemisimple { member } => write!(f, "NotSemisimple(member {member})"),
            Hypothesis::LyapunovFailed { reason } => write!(f, "LyapunovFailed({reason})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::linalg::MAX_DIM)]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("QR iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("empty input")]
    EmptyInput,
    #[error("empty family")]
    EmptyFamily,
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("vectors are collinear")]
    CollinearInput,
    #[error("cone is not proper: {0}")]
    ImproperCone(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("members {0} and {1} do not commute")]
    NotCommuting(usize, usize),
    #[error("member {0} is not diagonalizable")]
    NotDiagonalizable(usize),
    #[error("simultaneous diagonalization failed: {0}")]
    RefinementFailed(String),
    #[error("product with exponents {tuple:?} is not a Vandergraft matrix")]
    NonVandergraftProduct { tuple: Vec<u32> },
    #[error("pointedness certificate failed on generator {0}")]
    PointednessCertificateFailed(usize),
    #[error("member {0} is not normal")]
    NotNormal(usize),
    #[error("the family has no shared dominant eigenvector")]
    NoSharedDominantVector,
    #[error("the dominant eigenvalue of member {0} is not semisimple")]
    NotSemisimple(usize),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("alternating projections did not converge in {0} sweeps")]
    ProjectionNotConverged(usize),
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(Hypothesis),
    #[error("witness failed verification: {0}")]
    WitnessVerificationFailed(String),
    #[error("matrix is singular")]
    Singular,
}
