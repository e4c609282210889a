use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every decision procedure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ToleranceConfig {
    /// Relative distance below which computed eigenvalues are merged.
    pub eig_cluster_tol: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Tolerance for membership, angle and invariance comparisons.
    pub geom_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { eig_cluster_tol: 1e-8, rank_tol: 1e-10, geom_tol: 1e-9 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |t: f64| t.is_finite() && t > 0.0;
        if ok(self.eig_cluster_tol) && ok(self.rank_tol) && ok(self.geom_tol) {
            Ok(())
        } else {
            Err(Error::PreconditionFailed("tolerances must be finite and strictly positive".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let t = ToleranceConfig::default();
        t.validate().unwrap();
        assert_eq!(t.eig_cluster_tol, 1e-8);
        assert_eq!(t.rank_tol, 1e-10);
        assert_eq!(t.geom_tol, 1e-9);
    }

    #[test]
    fn rejects_nonpositive() {
        let t = ToleranceConfig { geom_tol: 0.0, ..Default::default() };
        assert!(t.validate().is_err());
    }
}
