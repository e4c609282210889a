//! The dominant index set over exponent tuples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::form::SimDiagForm;
use crate::cone::nnls::nnls;
use crate::error::{Error, Result};
use crate::linalg::ToleranceConfig;

pub const DEFAULT_BOUND: u32 = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DominantIndexSet {
    /// Block indices, increasing.
    pub indices: Vec<usize>,
    /// First tuple whose tie-broken maximizer is each index, parallel to `indices`.
    pub witnesses: Vec<Vec<u32>>,
    pub search_bound: u32,
    /// No index outside the set can ever be a maximizer.
    pub exact: bool,
}

impl DominantIndexSet {
    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn witness(&self, i: usize) -> Option<&[u32]> {
        self.indices.iter().position(|&k| k == i).map(|p| self.witnesses[p].as_slice())
    }
}

/// All tuples in `Z₊ⁿ` with entry sum at most `bound`, by total then lexicographically.
pub fn exponent_tuples(n: usize, bound: u32) -> Vec<Vec<u32>> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for total in 0..=bound {
        let mut cur = vec![0; n];
        rec(0, total, &mut cur, &mut out);
    }
    out
}

/// `Σ m_j ln|λ_ij|`, `−∞` when a used factor vanishes.
fn log_magnitude(row: &[Complex64], tuple: &[u32]) -> f64 {
    let mut s = 0.0;
    for (l, &m) in row.iter().zip(tuple) {
        if m == 0 {
            continue;
        }
        let a = l.norm();
        if a == 0.0 {
            return f64::NEG_INFINITY;
        }
        s += m as f64 * a.ln();
    }
    s
}

fn product(row: &[Complex64], tuple: &[u32]) -> Complex64 {
    row.iter().zip(tuple).fold(Complex64::new(1.0, 0.0), |acc, (l, &m)| acc * l.powu(m))
}

/// Maximizing set and tie-broken index for one tuple.
pub fn omega_and_p(form: &SimDiagForm, tuple: &[u32], tol: &ToleranceConfig) -> Result<(Vec<usize>, usize)> {
    let q = form.q();
    let logs: Vec<f64> = (0..q).map(|i| log_magnitude(&form.lambda[i], tuple)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rel = tol.eig_cluster_tol;
    let maximal: Vec<usize> = if top == f64::NEG_INFINITY {
        (0..q).collect()
    } else {
        (0..q).filter(|&i| logs[i] >= top - rel * (1.0 + top.abs())).collect()
    };
    let omega: Vec<usize> = maximal
        .iter()
        .copied()
        .filter(|&i| {
            if top == f64::NEG_INFINITY {
                return true;
            }
            let mu = product(&form.lambda[i], tuple);
            mu.im.abs() <= rel * mu.norm() && mu.re > 0.0
        })
        .collect();
    if omega.is_empty() {
        return Err(Error::NonVandergraftProduct { tuple: tuple.to_vec() });
    }
    let best = omega.iter().copied().map(|i| form.b[i].re).fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = omega.iter().copied().filter(|&i| form.b[i].re >= best - rel * best.abs().max(1.0)).collect();
    if ties.len() != 1 {
        return Err(Error::NonVandergraftProduct { tuple: tuple.to_vec() });
    }
    Ok((omega, ties[0]))
}

/// Whether index `i` maximizes `⟨d, x_i⟩` over the points for some `d` in the simplex.
fn weakly_maximal_somewhere(points: &[DVector<f64>], i: usize) -> bool {
    let n = points[i].len();
    let others: Vec<usize> = (0..points.len()).filter(|&k| k != i).collect();
    let rows = others.len() + 1;
    let mut a = DMatrix::zeros(rows, n + others.len());
    for (r, &k) in others.iter().enumerate() {
        for j in 0..n {
            a[(r, j)] = points[i][j] - points[k][j];
        }
        a[(r, n + r)] = -1.0;
    }
    for j in 0..n {
        a[(rows - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(rows);
    b[rows - 1] = 1.0;
    nnls(&a, &b).residual_norm <= 1e-9
}

/// Enumerates tuples with entry sum at most `bound` and accumulates the tie-broken maximizers.
pub fn dominant_index_set(form: &SimDiagForm, bound: u32, tol: &ToleranceConfig) -> Result<DominantIndexSet> {
    let mut found: Vec<(usize, Vec<u32>)> = Vec::new();
    for tuple in exponent_tuples(form.family_size, bound) {
        let (_, p) = omega_and_p(form, &tuple, tol)?;
        if !found.iter().any(|(i, _)| *i == p) {
            found.push((p, tuple));
        }
    }
    found.sort_by_key(|(i, _)| *i);
    let nonzero = form.lambda.iter().all(|row| row.iter().all(|l| l.norm() > 0.0));
    let exact = nonzero && {
        let points: Vec<DVector<f64>> = form
            .lambda
            .iter()
            .map(|row| DVector::from_iterator(row.len(), row.iter().map(|l| l.norm().ln())))
            .collect();
        (0..form.q()).filter(|i| !found.iter().any(|(k, _)| k == i)).all(|i| !weakly_maximal_somewhere(&points, i))
    };
    Ok(DominantIndexSet {
        indices: found.iter().map(|(i, _)| *i).collect(),
        witnesses: found.into_iter().map(|(_, t)| t).collect(),
        search_bound: bound,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;
    use crate::simdiag::form::simultaneous_diagonalize;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn tuple_order() {
        assert_eq!(
            exponent_tuples(2, 2),
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(exponent_tuples(3, 8).len(), 165);
    }

    #[test]
    fn orthant_pair_is_exact() {
        let f = vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[3.0, 1.0])];
        let form = simultaneous_diagonalize(&f, &t(), 1).unwrap();
        let p = dominant_index_set(&form, DEFAULT_BOUND, &t()).unwrap();
        assert_eq!(p.indices, vec![0]);
        assert_eq!(p.witness(0), Some(&[0u32, 0][..]));
        assert!(p.exact);
    }

    #[test]
    fn sign_pair_has_negative_dominant() {
        let f = vec![SquareMatrix::diag(&[1.0, -1.0]), SquareMatrix::diag(&[-1.0, 1.0])];
        let form = simultaneous_diagonalize(&f, &t(), 1).unwrap();
        let p = dominant_index_set(&form, 1, &t()).unwrap();
        assert!(p.indices.iter().any(|&i| form.lambda[i][1].re == -1.0));
        // the product of both is −I
        assert_eq!(
            dominant_index_set(&form, 2, &t()),
            Err(Error::NonVandergraftProduct { tuple: vec![1, 1] })
        );
    }

    /// Direct enumeration over the 3×2 table of the diagonal sign pair.
    #[test]
    fn three_axis_pair_matches_hand_enumeration() {
        let f = vec![SquareMatrix::diag(&[1.0, -1.0, -1.0]), SquareMatrix::diag(&[-1.0, -1.0, 1.0])];
        let form = simultaneous_diagonalize(&f, &t(), 1).unwrap();
        let p = dominant_index_set(&form, 2, &t());
        // (1,1) gives products (−1, 1, −1): only the middle axis is a nonnegative maximizer
        let (omega, pick) = omega_and_p(&form, &[1, 1], &t()).unwrap();
        assert_eq!(omega.len(), 1);
        assert_eq!(form.lambda[pick][0].re, -1.0);
        assert_eq!(form.lambda[pick][1].re, -1.0);
        let p = p.unwrap();
        for (k, &i) in p.indices.iter().enumerate() {
            let (_, q) = omega_and_p(&form, &p.witnesses[k], &t()).unwrap();
            assert_eq!(q, i);
        }
    }

    #[test]
    fn monotone_in_bound() {
        let f = vec![SquareMatrix::diag(&[2.0, 1.0, 3.0]), SquareMatrix::diag(&[1.0, 3.0, 0.5])];
        let form = simultaneous_diagonalize(&f, &t(), 9).unwrap();
        let sets: Vec<Vec<usize>> =
            [2, 4, 8].iter().map(|&m| dominant_index_set(&form, m, &t()).unwrap().indices).collect();
        for w in sets.windows(2) {
            assert!(w[0].iter().all(|i| w[1].contains(i)));
        }
    }
}
