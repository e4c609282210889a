//! Outcome types shared by every decision procedure.

use serde::{Deserialize, Serialize};

use crate::cone::{ConeRep, InvarianceReport};
use crate::error::Hypothesis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Answer {
    Yes,
    No,
    Undecided,
}

impl Answer {
    pub fn as_str(&self) -> &'static str {
        match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
            Answer::Undecided => "UNDECIDED",
        }
    }
}

/// Named reason for a NO verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailedCondition {
    NotVandergraftInA1,
    OrientationConflict,
    TooManyNondiagLines,
    SeparationFails,
    BigConeImproper,
    BigConeHitsNonDominant,
    BigConeEdgeCollision,
    NegDetTraceZeroConflict,
    TwoLineConditionFails,
    NotVandergraft,
    NonVandergraftProduct,
    NegativeEigenvalueOnDominantIndex,
}

/// Where a matrix of an extended family comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Member(usize),
    Product(usize, usize),
}

impl Origin {
    pub fn members(&self) -> Vec<usize> {
        match *self {
            Origin::Member(i) => vec![i],
            Origin::Product(i, j) if i == j => vec![i],
            Origin::Product(i, j) => vec![i, j],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LineRecord {
    /// Angle of the line in degrees, in `[0, 180)`.
    pub angle_deg: f64,
    pub dominant: bool,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberCheck {
    pub member: usize,
    pub report: InvarianceReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failed: Option<FailedCondition>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hypothesis: Option<Hypothesis>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub members: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub products: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub lines: Vec<LineRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tuple: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub checks: Vec<MemberCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(method: &str) -> Self {
        Certificate { method: method.into(), ..Default::default() }
    }

    pub fn failing(method: &str, failed: FailedCondition, members: Vec<usize>) -> Self {
        Certificate { method: method.into(), failed: Some(failed), members, ..Default::default() }
    }

    pub fn flag(&mut self, f: impl Into<String>) {
        let f = f.into();
        if !self.flags.contains(&f) {
            self.flags.push(f);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDecision {
    pub answer: Answer,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<ConeRep>,
    pub certificate: Certificate,
}

impl FamilyDecision {
    pub fn yes(witness: ConeRep, certificate: Certificate) -> Self {
        FamilyDecision { answer: Answer::Yes, witness: Some(witness), certificate }
    }

    pub fn no(certificate: Certificate) -> Self {
        FamilyDecision { answer: Answer::No, witness: None, certificate }
    }

    pub fn undecided(certificate: Certificate) -> Self {
        FamilyDecision { answer: Answer::Undecided, witness: None, certificate }
    }

    pub fn is_yes(&self) -> bool {
        self.answer == Answer::Yes
    }

    pub fn failed(&self) -> Option<FailedCondition> {
        self.certificate.failed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answer_strings() {
        assert_eq!(serde_json::to_string(&Answer::Undecided).unwrap(), "\"UNDECIDED\"");
        assert_eq!(serde_json::to_string(&FailedCondition::SeparationFails).unwrap(), "\"SeparationFails\"");
        assert_eq!(serde_json::to_string(&Origin::Product(0, 1)).unwrap(), r#"{"product":[0,1]}"#);
    }
}
