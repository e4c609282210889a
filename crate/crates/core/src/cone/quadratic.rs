use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::MembershipResult;
use crate::error::{Error, Result};
use crate::linalg::{dense, mat_serde, vec_serde, ToleranceConfig};

/// `K = { c·x + B z : c ≥ 0, zᵀ V z ≤ c² }` with unit axis `x` and orthonormal complement basis `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadraticCone {
    pub dim: usize,
    #[serde(with = "vec_serde")]
    pub axis: DVector<f64>,
    #[serde(with = "mat_serde")]
    pub form: DMatrix<f64>,
    #[serde(with = "mat_serde")]
    pub complement_basis: DMatrix<f64>,
}

fn complement_of(axis: &DVector<f64>) -> DMatrix<f64> {
    let row = DMatrix::from_row_slice(1, axis.len(), axis.as_slice());
    dense::null_space(&row, 1e-12)
}

impl QuadraticCone {
    pub fn new(axis: DVector<f64>, form: DMatrix<f64>, complement_basis: DMatrix<f64>) -> Result<Self> {
        let dim = axis.len();
        let n = axis.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        let axis = axis / n;
        if complement_basis.nrows() != dim || complement_basis.ncols() + 1 != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: complement_basis.nrows() });
        }
        if form.nrows() + 1 != dim || form.ncols() + 1 != dim {
            return Err(Error::DimensionMismatch { expected: dim - 1, found: form.nrows() });
        }
        let gram = complement_basis.transpose() * &complement_basis;
        let ortho = (gram - DMatrix::identity(dim - 1, dim - 1)).amax() <= 1e-8
            && (complement_basis.transpose() * &axis).amax() <= 1e-8;
        if !ortho {
            return Err(Error::PreconditionFailed("complement basis must be orthonormal and orthogonal to the axis".into()));
        }
        let asym = (&form - form.transpose()).amax();
        if asym > 1e-8 * form.amax().max(1.0) {
            return Err(Error::PreconditionFailed("form must be symmetric".into()));
        }
        let form = (&form + form.transpose()) * 0.5;
        if dim > 1 && dense::sym_min_eig(&form) <= 0.0 {
            return Err(Error::PreconditionFailed("form must be positive definite".into()));
        }
        Ok(QuadraticCone { dim, axis, form, complement_basis })
    }

    /// Lorentz cone `{c·x + y : c ≥ ‖y‖}` about `axis`.
    pub fn ice_cream(axis: &DVector<f64>) -> Result<Self> {
        let n = axis.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        let x = axis / n;
        let b = complement_of(&x);
        let d = x.len();
        Self::new(x, DMatrix::identity(d - 1, d - 1), b)
    }

    /// Cone `{v : vᵀQv ≤ 0}` on the side of `interior_point`; `Q` must have
    /// exactly one negative eigenvalue.
    pub fn from_quadratic_form(q: &DMatrix<f64>, interior_point: &DVector<f64>) -> Result<Self> {
        let d = q.nrows();
        if q.ncols() != d || interior_point.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: interior_point.len() });
        }
        let sym = (q + q.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let neg: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] < 0.0).collect();
        let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        let pos_ok = (0..d)
            .filter(|i| !neg.contains(i))
            .all(|i| eig.eigenvalues[i] > 1e-13 * scale);
        if neg.len() != 1 || !pos_ok {
            return Err(Error::PreconditionFailed("form must have inertia (d-1, 0, 1)".into()));
        }
        let k = neg[0];
        let mu = -eig.eigenvalues[k];
        let mut x = eig.eigenvectors.column(k).into_owned();
        let side = x.dot(interior_point);
        if side == 0.0 {
            return Err(Error::PreconditionFailed("interior point is orthogonal to the axis".into()));
        }
        if side < 0.0 {
            x.neg_mut();
        }
        let others: Vec<usize> = (0..d).filter(|&i| i != k).collect();
        let b = DMatrix::from_fn(d, d - 1, |r, c| eig.eigenvectors[(r, others[c])]);
        let v = DMatrix::from_fn(d - 1, d - 1, |r, c| if r == c { eig.eigenvalues[others[r]] / mu } else { 0.0 });
        Self::new(x, v, b)
    }

    /// Ambient matrix `Q = B V Bᵀ − x xᵀ`, so `K = {v : vᵀQv ≤ 0, xᵀv ≥ 0}`.
    pub fn ambient_form(&self) -> DMatrix<f64> {
        &self.complement_basis * &self.form * self.complement_basis.transpose() - &self.axis * self.axis.transpose()
    }

    /// Dual cone form: `K* = {d·x + B w : wᵀV⁻¹w ≤ d², d ≥ 0}`; returns `(d, wᵀV⁻¹w)`.
    pub fn dual_coordinates(&self, u: &DVector<f64>) -> (f64, f64) {
        let d = self.axis.dot(u);
        let w = self.complement_basis.transpose() * u;
        let vinv = self.form.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(self.dim - 1, self.dim - 1));
        (d, w.dot(&(vinv * &w)))
    }

    fn coords(&self, v: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.axis.dot(v), self.complement_basis.transpose() * v)
    }

    pub fn contains(&self, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<MembershipResult> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Ok(MembershipResult { inside: true, distance: 0.0, interior: false });
        }
        let u = v / norm;
        let (c, z) = self.coords(&u);
        let q = z.dot(&(&self.form * &z));
        let g = tol.geom_tol;
        let inside = c >= -g && q <= c * c + g;
        let interior = c > g && q < c * c - g;
        let distance = if inside { 0.0 } else { self.distance(v) };
        Ok(MembershipResult { inside, distance, interior })
    }

    /// Euclidean distance to the cone.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        let (c0, z0) = self.coords(v);
        let eig = SymmetricEigen::new(self.form.clone());
        let w = eig.eigenvectors.transpose() * &z0;
        let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let q0: f64 = w.iter().zip(&lam).map(|(a, l)| l * a * a).sum();
        if c0 >= 0.0 && q0 <= c0 * c0 {
            return 0.0;
        }
        // squared distance from z0 to the slice {zᵀVz ≤ c²}
        let slice = |c: f64| -> f64 {
            if q0 <= c * c {
                return 0.0;
            }
            if c <= 0.0 {
                return w.norm_squared();
            }
            let qf = |mu: f64| -> f64 {
                w.iter().zip(&lam).map(|(a, l)| l * (a / (1.0 + mu * l)).powi(2)).sum()
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            while qf(hi) > c * c {
                hi *= 2.0;
                if hi > 1e300 {
                    break;
                }
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if qf(mid) > c * c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            w.iter().zip(&lam).map(|(a, l)| (a * hi * l / (1.0 + hi * l)).powi(2)).sum()
        };
        let f = |c: f64| (c - c0).powi(2) + slice(c);
        let (mut a, mut b) = (0.0, v.norm().max(c0.abs()) * 2.0 + 1e-300);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..120 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = f(x2);
            }
        }
        let best = f(0.5 * (a + b)).min(f(0.0));
        best.max(0.0).sqrt()
    }
}
