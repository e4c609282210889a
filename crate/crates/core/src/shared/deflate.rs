//! Splitting off a common eigenvector with an invariant complement.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense, mat_serde, SquareMatrix, ToleranceConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeflatedFamily {
    /// First column is the common eigenvector.
    #[serde(with = "mat_serde")]
    pub s: DMatrix<f64>,
    /// `S⁻¹A_jS = diag(λ₀_j, B_j)`.
    #[serde(with = "mat_serde::list")]
    pub blocks: Vec<DMatrix<f64>>,
    pub lambda0: Vec<f64>,
    /// Largest off-block entry mass relative to `max(1, ‖A_j‖)`.
    pub residual: f64,
}

pub fn commuting_tol(tol: &ToleranceConfig) -> f64 {
    (100.0 * tol.eig_cluster_tol).max(tol.geom_tol)
}

pub fn check_commuting(family: &[SquareMatrix], tol: &ToleranceConfig) -> Result<()> {
    let ct = commuting_tol(tol);
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if family[i].commutator_defect(&family[j]) > ct {
                return Err(Error::NotCommuting(i, j));
            }
        }
    }
    Ok(())
}

/// Peels off, member by member, the range of `A_j − λ₀_j` (invariant under the whole family by
/// commutativity) until only the common `λ₀` eigenspace remains.
pub fn deflate(family: &[SquareMatrix], x: &DVector<f64>, tol: &ToleranceConfig) -> Result<DeflatedFamily> {
    let n = crate::linalg::family_dim(family)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let xn = x.norm();
    if xn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let x = x / xn;
    check_commuting(family, tol)?;
    let mut lambda0 = Vec::with_capacity(family.len());
    for a in family {
        let ax = a.apply(&x);
        let l = x.dot(&ax);
        if (ax - &x * l).norm() > 1e3 * tol.eig_cluster_tol * a.norm().max(1.0) {
            return Err(Error::PreconditionFailed("vector is not a common eigenvector".into()));
        }
        lambda0.push(l);
    }

    let mut w = DMatrix::<f64>::identity(n, n);
    let mut complement: Vec<DVector<f64>> = Vec::new();
    for (j, a) in family.iter().enumerate() {
        let k = w.ncols();
        let shifted = w.transpose() * a.as_matrix() * &w - DMatrix::identity(k, k) * lambda0[j];
        let e = dense::null_space(&shifted, tol.rank_tol);
        let r = dense::range_basis(&shifted, tol.rank_tol);
        let joint = DMatrix::from_columns(&e.column_iter().chain(r.column_iter()).map(|c| c.into_owned()).collect::<Vec<_>>());
        if e.ncols() + r.ncols() != k || (k > 0 && dense::rank(&joint, tol.rank_tol).rank < k) {
            return Err(Error::NotSemisimple(j));
        }
        for c in (&w * r).column_iter() {
            let mut v = c.into_owned();
            dense::sign_normalize(&mut v);
            complement.push(v);
        }
        w = &w * e;
    }
    let z = w.transpose() * &x;
    let zrow = DMatrix::from_row_slice(1, z.len(), z.as_slice());
    let inner = &w * dense::null_space(&zrow, 1e-12);
    let mut cols = vec![x.clone()];
    for c in inner.column_iter() {
        let mut v = c.into_owned();
        dense::sign_normalize(&mut v);
        cols.push(v);
    }
    cols.extend(complement);
    if cols.len() != n {
        return Err(Error::RefinementFailed("deflation basis does not span the space".into()));
    }
    let s = DMatrix::from_columns(&cols);
    let sinv = s.clone().try_inverse().ok_or(Error::Singular)?;
    let mut blocks = Vec::with_capacity(family.len());
    let mut residual: f64 = 0.0;
    for (a, &l) in family.iter().zip(&lambda0) {
        let t = &sinv * a.as_matrix() * &s;
        let off = t.view((0, 1), (1, n - 1)).norm() + t.view((1, 0), (n - 1, 1)).norm() + (t[(0, 0)] - l).abs();
        residual = residual.max(off / a.norm().max(1.0));
        blocks.push(t.view((1, 1), (n - 1, n - 1)).into_owned());
    }
    if residual > 1e3 * tol.eig_cluster_tol {
        return Err(Error::RefinementFailed(format!("deflation residual {residual:.3e}")));
    }
    Ok(DeflatedFamily { s, blocks, lambda0, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn e1(n: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[0] = 1.0;
        v
    }

    #[test]
    fn diagonal_is_identity_split() {
        let d = deflate(&[SquareMatrix::diag(&[1.0, 0.5])], &e1(2), &t()).unwrap();
        assert_eq!(d.s, DMatrix::identity(2, 2));
        assert_eq!(d.blocks[0], DMatrix::from_element(1, 1, 0.5));
    }

    #[test]
    fn jordan_pair_is_not_semisimple() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let b = SquareMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(deflate(&[a, b], &e1(2), &t()), Err(Error::NotSemisimple(0)));
    }

    #[test]
    fn circulant_pair_reconstructs() {
        // P = cyclic shift; members are polynomials in P, all fixing (1,1,1)
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let i = DMatrix::<f64>::identity(3, 3);
        let a = SquareMatrix::new(&i * 2.0 + &p * 0.5).unwrap();
        let b = SquareMatrix::new(&i + &p * 0.3 + &p * &p * 0.2).unwrap();
        let x = DVector::from_element(3, 1.0);
        let d = deflate(&[a.clone(), b.clone()], &x, &t()).unwrap();
        assert!(d.residual < 1e-10);
        for (m, (blk, &l)) in [a, b].iter().zip(d.blocks.iter().zip(&d.lambda0)) {
            assert_eq!(blk.nrows(), 2);
            let mut full = DMatrix::zeros(3, 3);
            full[(0, 0)] = l;
            full.view_mut((1, 1), (2, 2)).copy_from(blk);
            let back = &d.s * full * d.s.clone().try_inverse().unwrap();
            assert!((back - m.as_matrix()).amax() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_commuting() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.5]]).unwrap();
        let b = SquareMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.2]]).unwrap();
        assert_eq!(deflate(&[a, b], &e1(2), &t()), Err(Error::NotCommuting(0, 1)));
    }
}
