use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::nnls::nnls;
use super::{MembershipResult, ProperReport};
use crate::error::{Error, Result};
use crate::linalg::{dense, vec_serde, ToleranceConfig};

/// Finitely generated cone with unit-norm generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    pub dim: usize,
    #[serde(with = "vec_serde::list")]
    pub generators: Vec<DVector<f64>>,
}

impl PolyhedralCone {
    /// Normalizes the generators; keeps order and sign.
    pub fn new(dim: usize, generators: Vec<DVector<f64>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut out = Vec::with_capacity(generators.len());
        for g in generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.len() });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::PreconditionFailed("non-finite generator".into()));
            }
            let n = g.norm();
            if n == 0.0 {
                return Err(Error::ZeroVector);
            }
            out.push(g / n);
        }
        Ok(PolyhedralCone { dim, generators: out })
    }

    pub fn from_slices(gens: &[&[f64]]) -> Result<Self> {
        let dim = gens.first().ok_or(Error::EmptyInput)?.len();
        Self::new(dim, gens.iter().map(|g| DVector::from_column_slice(g)).collect())
    }

    /// The nonnegative orthant of `R^dim`.
    pub fn orthant(dim: usize) -> Self {
        let gens = (0..dim)
            .map(|i| {
                let mut e = DVector::zeros(dim);
                e[i] = 1.0;
                e
            })
            .collect();
        PolyhedralCone { dim, generators: gens }
    }

    pub fn generator_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.generators)
    }

    /// Euclidean distance from `v` to the cone.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        if self.dim == 2 {
            if let Some(d) = self.distance_2d(v) {
                return d;
            }
        }
        nnls(&self.generator_matrix(), v).residual_norm
    }

    fn distance_2d(&self, v: &DVector<f64>) -> Option<f64> {
        let ray = |g: &DVector<f64>| {
            let t = g.dot(v);
            if t > 0.0 {
                (v - g * t).norm()
            } else {
                v.norm()
            }
        };
        match self.generators.len() {
            1 => Some(ray(&self.generators[0])),
            2 => {
                let (g1, g2) = (&self.generators[0], &self.generators[1]);
                let det = g1[0] * g2[1] - g1[1] * g2[0];
                if det.abs() < 1e-12 {
                    return None;
                }
                let a = (v[0] * g2[1] - v[1] * g2[0]) / det;
                let b = (g1[0] * v[1] - g1[1] * v[0]) / det;
                if a >= 0.0 && b >= 0.0 {
                    Some(0.0)
                } else {
                    Some(ray(g1).min(ray(g2)))
                }
            }
            _ => None,
        }
    }

    pub fn contains(&self, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<MembershipResult> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Ok(MembershipResult { inside: true, distance: 0.0, interior: false });
        }
        let dist = self.distance(v);
        let inside = dist <= tol.geom_tol * norm;
        let interior = inside && self.is_interior(v, tol);
        Ok(MembershipResult { inside, distance: if inside { 0.0 } else { dist }, interior })
    }

    fn is_interior(&self, v: &DVector<f64>, tol: &ToleranceConfig) -> bool {
        let g = self.generator_matrix();
        if dense::rank(&g, tol.rank_tol).rank < self.dim {
            return false;
        }
        if self.dim == 2 && self.generators.len() == 2 {
            let (g1, g2) = (&self.generators[0], &self.generators[1]);
            let det = g1[0] * g2[1] - g1[1] * g2[0];
            let u = v / v.norm();
            let a = (u[0] * g2[1] - u[1] * g2[0]) / det;
            let b = (g1[0] * u[1] - g1[1] * u[0]) / det;
            return a > tol.geom_tol && b > tol.geom_tol;
        }
        let s: DVector<f64> = self.generators.iter().sum();
        let sn = s.norm();
        if sn == 0.0 {
            return false;
        }
        let probe = v - &s * (tol.geom_tol.sqrt() * v.norm() / sn);
        self.distance(&probe) <= tol.geom_tol * probe.norm()
    }

    pub fn is_proper(&self, tol: &ToleranceConfig) -> ProperReport {
        let solid = dense::rank(&self.generator_matrix(), tol.rank_tol).rank == self.dim;
        let pointed = self.is_pointed(tol);
        ProperReport::new(pointed, solid)
    }

    /// Pointed iff no `−g_j` lies in the cone.
    pub fn is_pointed(&self, tol: &ToleranceConfig) -> bool {
        self.generators
            .iter()
            .all(|g| self.distance(&(-g)) > tol.geom_tol)
    }

    /// Drops every generator that is a nonnegative combination of the remaining ones.
    pub fn prune(&self, tol: &ToleranceConfig) -> PolyhedralCone {
        let mut keep: Vec<DVector<f64>> = self.generators.clone();
        let mut i = 0;
        while i < keep.len() && keep.len() > 1 {
            let others: Vec<DVector<f64>> =
                keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
            let sub = PolyhedralCone { dim: self.dim, generators: others };
            if sub.distance(&keep[i]) <= tol.geom_tol {
                keep.remove(i);
            } else {
                i += 1;
            }
        }
        PolyhedralCone { dim: self.dim, generators: keep }
    }
}

/// Normalizes and deduplicates (unit vectors closer than `geomTol`).
pub fn conic_hull(vectors: &[DVector<f64>], dim: usize, tol: &ToleranceConfig) -> Result<PolyhedralCone> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        let u = v / n;
        if !out.iter().any(|w| (w - &u).norm() < tol.geom_tol) {
            out.push(u);
        }
    }
    Ok(PolyhedralCone { dim, generators: out })
}

pub fn prune_generators(k: &PolyhedralCone, tol: &ToleranceConfig) -> PolyhedralCone {
    k.prune(tol)
}
