//! Versioned JSON files read and written by the tool.

use conelab::cone::ConeRep;
use conelab::{Answer, Certificate, SquareMatrix, ToleranceConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FAMILY_SCHEMA: &str = "conelab/family/v1";
pub const DECISION_SCHEMA: &str = "conelab/decision/v1";
pub const CONE_SCHEMA: &str = "conelab/cone/v1";

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected schema \"{expected}\", found \"{found}\"")]
    Schema { expected: &'static str, found: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] conelab::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyFile {
    pub schema: String,
    pub dimension: usize,
    pub matrices: Vec<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub similarity: Option<Vec<Vec<f64>>>,
}

/// A validated family.
#[derive(Clone, Debug)]
pub struct Family {
    pub members: Vec<SquareMatrix>,
    pub labels: Vec<String>,
    pub similarity: Option<SquareMatrix>,
}

fn matrix(rows: &[Vec<f64>], n: usize, what: &str) -> Result<SquareMatrix, InputError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(InputError::Invalid(format!("{what} is not {n}x{n}")));
    }
    Ok(SquareMatrix::from_rows(rows)?)
}

impl FamilyFile {
    pub fn new(members: &[SquareMatrix], labels: Option<Vec<String>>) -> Self {
        FamilyFile {
            schema: FAMILY_SCHEMA.into(),
            dimension: members.first().map_or(0, |m| m.dim()),
            matrices: members.iter().map(|m| m.to_rows()).collect(),
            labels,
            similarity: None,
        }
    }

    pub fn validate(&self) -> Result<Family, InputError> {
        if self.schema != FAMILY_SCHEMA {
            return Err(InputError::Schema { expected: FAMILY_SCHEMA, found: self.schema.clone() });
        }
        let n = self.dimension;
        if n == 0 {
            return Err(InputError::Invalid("dimension must be positive".into()));
        }
        if self.matrices.is_empty() {
            return Err(InputError::Invalid("family has no matrices".into()));
        }
        let members = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| matrix(m, n, &format!("matrix {i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = match &self.labels {
            Some(l) if l.len() != members.len() => {
                return Err(InputError::Invalid(format!("{} labels for {} matrices", l.len(), members.len())))
            }
            Some(l) => l.clone(),
            None => (0..members.len()).map(|i| format!("A{}", i + 1)).collect(),
        };
        let similarity = self.similarity.as_ref().map(|s| matrix(s, n, "similarity")).transpose()?;
        Ok(Family { members, labels, similarity })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "2x2")]
    TwoByTwo,
    #[serde(rename = "simdiag")]
    Simdiag,
    #[serde(rename = "shared-dominant")]
    SharedDominant,
    #[serde(rename = "none-applicable")]
    NoneApplicable,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::TwoByTwo => "2x2",
            Route::Simdiag => "simdiag",
            Route::SharedDominant => "shared-dominant",
            Route::NoneApplicable => "none-applicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionFile {
    pub schema: String,
    pub answer: Answer,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<ConeRep>,
    pub certificate: Certificate,
    pub route: Route,
    pub tool_version: String,
    pub seed: u64,
    pub tolerances: ToleranceConfig,
    /// Seconds since the Unix epoch; absent in reproducible output.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<u64>,
}

impl DecisionFile {
    pub fn validate(&self) -> Result<(), InputError> {
        if self.schema != DECISION_SCHEMA {
            return Err(InputError::Schema { expected: DECISION_SCHEMA, found: self.schema.clone() });
        }
        if self.witness.is_some() != (self.answer == Answer::Yes) {
            return Err(InputError::Invalid("witness must be present exactly when the answer is YES".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeFile {
    pub schema: String,
    pub cone: ConeRep,
}

impl ConeFile {
    pub fn new(cone: ConeRep) -> Self {
        ConeFile { schema: CONE_SCHEMA.into(), cone }
    }
}

pub fn read_text(path: &str) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.into(), source })
}

pub fn parse_family(text: &str) -> Result<Family, InputError> {
    serde_json::from_str::<FamilyFile>(text)?.validate()
}

/// A cone file, or the witness of a YES decision file.
pub fn parse_cone(text: &str) -> Result<ConeRep, InputError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or_default().to_string();
    match schema.as_str() {
        CONE_SCHEMA => Ok(serde_json::from_value::<ConeFile>(value)?.cone),
        DECISION_SCHEMA => {
            let d: DecisionFile = serde_json::from_value(value)?;
            d.validate()?;
            d.witness.ok_or_else(|| InputError::Invalid("decision has no witness".into()))
        }
        _ => Err(InputError::Schema { expected: CONE_SCHEMA, found: schema }),
    }
}

pub fn parse_decision(text: &str) -> Result<DecisionFile, InputError> {
    let d: DecisionFile = serde_json::from_str(text)?;
    d.validate()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_rejects_bad_shapes() {
        let text = r#"{"schema":"conelab/family/v1","dimension":2,"matrices":[[[1,0],[0]]]}"#;
        assert!(matches!(parse_family(text), Err(InputError::Invalid(_))));
        let text = r#"{"schema":"conelab/family/v1","dimension":2,"matrices":[[[1,0],[0,1]]],"labels":["a","b"]}"#;
        assert!(matches!(parse_family(text), Err(InputError::Invalid(_))));
        let text = r#"{"schema":"other","dimension":1,"matrices":[[[1]]]}"#;
        assert!(matches!(parse_family(text), Err(InputError::Schema { .. })));
    }

    #[test]
    fn family_defaults_labels() {
        let text = r#"{"schema":"conelab/family/v1","dimension":1,"matrices":[[[1]],[[2]]]}"#;
        assert_eq!(parse_family(text).unwrap().labels, vec!["A1", "A2"]);
    }
}
