//! Cone representations, membership, properness and invariance oracles.

pub mod invariance;
pub mod nnls;
pub mod polyhedral;
pub mod quadratic;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::ToleranceConfig;

pub use invariance::{is_invariant, InvarianceMethod, InvarianceReport};
pub use polyhedral::{conic_hull, prune_generators, PolyhedralCone};
pub use quadratic::QuadraticCone;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConeRep {
    Polyhedral(PolyhedralCone),
    Quadratic(QuadraticCone),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub inside: bool,
    pub distance: f64,
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProperReport {
    pub proper: bool,
    pub pointed: bool,
    pub solid: bool,
    pub diagnosis: String,
}

impl ProperReport {
    pub fn new(pointed: bool, solid: bool) -> Self {
        let diagnosis = match (pointed, solid) {
            (true, true) => "proper",
            (false, true) => "not pointed",
            (true, false) => "not solid",
            (false, false) => "not pointed, not solid",
        };
        ProperReport { proper: pointed && solid, pointed, solid, diagnosis: diagnosis.into() }
    }
}

impl ConeRep {
    pub fn dim(&self) -> usize {
        match self {
            ConeRep::Polyhedral(k) => k.dim,
            ConeRep::Quadratic(k) => k.dim,
        }
    }

    pub fn contains(&self, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<MembershipResult> {
        match self {
            ConeRep::Polyhedral(k) => k.contains(v, tol),
            ConeRep::Quadratic(k) => k.contains(v, tol),
        }
    }

    pub fn is_proper(&self, tol: &ToleranceConfig) -> ProperReport {
        match self {
            ConeRep::Polyhedral(k) => k.is_proper(tol),
            ConeRep::Quadratic(_) => ProperReport {
                proper: true,
                pointed: true,
                solid: true,
                diagnosis: "by construction".into(),
            },
        }
    }

    pub fn as_polyhedral(&self) -> Option<&PolyhedralCone> {
        match self {
            ConeRep::Polyhedral(k) => Some(k),
            ConeRep::Quadratic(_) => None,
        }
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticCone> {
        match self {
            ConeRep::Quadratic(k) => Some(k),
            ConeRep::Polyhedral(_) => None,
        }
    }
}

pub fn contains(k: &ConeRep, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<MembershipResult> {
    k.contains(v, tol)
}

pub fn is_proper(k: &ConeRep, tol: &ToleranceConfig) -> ProperReport {
    k.is_proper(tol)
}
