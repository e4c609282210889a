//! Truncated invariant cone generated from the eigenbasis seeds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dominant::{exponent_tuples, DominantIndexSet};
use super::form::SimDiagForm;
use crate::cone::{conic_hull, PolyhedralCone};
use crate::error::{Error, Result};
use crate::linalg::{SquareMatrix, ToleranceConfig};

pub const DEFAULT_WORD_LEN: u32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimDiagCone {
    pub cone: PolyhedralCone,
    pub word_len: u32,
    /// Largest `dist(A_j g, K)` over unit generators `g` and members.
    pub defect: f64,
    /// Generators produced before pruning.
    pub raw_generators: usize,
}

/// Coordinates along `F = F₊ ∪ F₋ ∪ F_c` and the action of every member on them.
struct Basis {
    f: DMatrix<f64>,
    /// Number of `F₊` columns.
    p: usize,
    /// `(u, v)` column pairs of `F_c`, as positions in `f`.
    pairs: Vec<(usize, usize)>,
    /// Per position: `(block, is_complex_pair_member)`.
    block_of: Vec<usize>,
}

fn build_basis(form: &SimDiagForm, dominant: &DominantIndexSet, tol: &ToleranceConfig) -> Result<Basis> {
    let m = form.dim();
    let mut plus: Vec<(DVector<f64>, usize)> = Vec::new();
    let mut minus: Vec<(DVector<f64>, usize)> = Vec::new();
    let mut complex: Vec<(DVector<f64>, DVector<f64>, usize)> = Vec::new();
    for i in 0..form.q() {
        let real = form.is_real_block(i, tol.eig_cluster_tol);
        for c in form.block_range(i) {
            let col = form.s.column(c);
            if real {
                let v = col.map(|z| z.re);
                if dominant.contains(i) {
                    plus.push((v, i));
                } else {
                    minus.push((v, i));
                }
            } else if form.b[i].im > 0.0 {
                complex.push((col.map(|z| z.re), col.map(|z| z.im), i));
            }
        }
    }
    if dominant.indices.iter().any(|&i| !form.is_real_block(i, tol.eig_cluster_tol)) {
        return Err(Error::PreconditionFailed("a dominant block is not real".into()));
    }
    let mut cols = Vec::with_capacity(m);
    let mut block_of = Vec::with_capacity(m);
    for (v, i) in plus.iter().chain(&minus) {
        cols.push(v.clone());
        block_of.push(*i);
    }
    let mut pairs = Vec::new();
    for (u, v, i) in &complex {
        pairs.push((cols.len(), cols.len() + 1));
        cols.push(u.clone());
        cols.push(v.clone());
        block_of.push(*i);
        block_of.push(*i);
    }
    if cols.len() != m {
        return Err(Error::RefinementFailed("eigenbasis does not span the space".into()));
    }
    Ok(Basis { f: DMatrix::from_columns(&cols), p: plus.len(), pairs, block_of })
}

/// Applies the product with exponents `tuple` in `F`-coordinates.
fn act(form: &SimDiagForm, basis: &Basis, tuple: &[u32], alpha: &DVector<f64>) -> DVector<f64> {
    let mu = |i: usize| {
        form.lambda[i].iter().zip(tuple).fold(Complex64::new(1.0, 0.0), |acc, (l, &e)| acc * l.powu(e))
    };
    let mut out = alpha.clone();
    let paired: Vec<usize> = basis.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    for k in 0..alpha.len() {
        if !paired.contains(&k) {
            out[k] = mu(basis.block_of[k]).re * alpha[k];
        }
    }
    for &(a, b) in &basis.pairs {
        let z = mu(basis.block_of[a]);
        // A u = Re μ u − Im μ v,  A v = Im μ u + Re μ v
        out[a] = z.re * alpha[a] + z.im * alpha[b];
        out[b] = -z.im * alpha[a] + z.re * alpha[b];
    }
    out
}

/// Checks the pointedness inequality `Σ_{j≤p} α_j ≥ c·Σ_{j>p} |α_j|` with `α_j ≥ 0` for `j ≤ p`.
fn pointed_inequality(alpha: &DVector<f64>, p: usize, c: f64) -> bool {
    let scale = alpha.amax().max(f64::MIN_POSITIVE);
    let slack = 1e-9 * scale;
    let head = alpha.rows(0, p);
    let lhs: f64 = head.sum();
    let rhs: f64 = alpha.rows(p, alpha.len() - p).iter().map(|x| x.abs()).sum();
    head.iter().all(|&x| x >= -slack) && lhs >= c * rhs - slack * alpha.len() as f64
}

/// Builds the cone generated by `F₊`, `f + F₋`, `f + F_c` and their images under products of total degree ≤ `word_len`.
pub fn construct_simdiag_cone(
    family: &[SquareMatrix],
    form: &SimDiagForm,
    dominant: &DominantIndexSet,
    word_len: u32,
    tol: &ToleranceConfig,
) -> Result<SimDiagCone> {
    let basis = build_basis(form, dominant, tol)?;
    let m = form.dim();
    let p = basis.p;
    let mut f_alpha = DVector::zeros(m);
    for k in 0..p {
        f_alpha[k] = 1.0;
    }
    let mut seeds: Vec<(DVector<f64>, f64)> = Vec::new();
    for k in 0..p {
        let mut e = DVector::zeros(m);
        e[k] = 1.0;
        seeds.push((e, 1.0));
    }
    let paired: Vec<usize> = basis.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    for k in p..m {
        let mut e = f_alpha.clone();
        e[k] += 1.0;
        let c = if paired.contains(&k) { 0.5 } else { 1.0 };
        seeds.push((e, c));
    }
    let mut alphas = Vec::new();
    for tuple in exponent_tuples(form.family_size, word_len) {
        for (seed, c) in &seeds {
            let a = act(form, &basis, &tuple, seed);
            if a.norm() == 0.0 {
                continue;
            }
            if !pointed_inequality(&a, p, *c) {
                let idx = alphas.len();
                return Err(Error::PointednessCertificateFailed(idx));
            }
            alphas.push(a);
        }
    }
    let gens: Vec<DVector<f64>> = alphas.iter().map(|a| &basis.f * a).filter(|g| g.norm() > 0.0).collect();
    let raw_generators = gens.len();
    let cone = conic_hull(&gens, m, tol)?.prune(tol);
    let defect = invariance_defect(family, &cone);
    Ok(SimDiagCone { cone, word_len, defect, raw_generators })
}

/// `max_{g, j} dist(A_j g, K)` over unit generators.
pub fn invariance_defect(family: &[SquareMatrix], k: &PolyhedralCone) -> f64 {
    let mut worst: f64 = 0.0;
    for a in family {
        for g in &k.generators {
            worst = worst.max(k.distance(&a.apply(g)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simdiag::dominant::dominant_index_set;
    use crate::simdiag::form::simultaneous_diagonalize;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn build(family: &[SquareMatrix], l: u32) -> SimDiagCone {
        let form = simultaneous_diagonalize(family, &t(), 1).unwrap();
        let p = dominant_index_set(&form, 8, &t()).unwrap();
        construct_simdiag_cone(family, &form, &p, l, &t()).unwrap()
    }

    #[test]
    fn single_diagonal() {
        let f = vec![SquareMatrix::diag(&[2.0, 1.0])];
        for l in [1, 4] {
            let c = build(&f, l);
            assert_eq!(c.defect, 0.0);
            let g = &c.cone.generators;
            assert_eq!(g.len(), 2);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            assert!(g.iter().any(|v| (v - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-12));
            assert!(g.iter().any(|v| (v[0] - s).abs() < 1e-12 && (v[1].abs() - s).abs() < 1e-12));
        }
    }

    #[test]
    fn identity() {
        let c = build(&[SquareMatrix::identity(3)], 3);
        assert!(c.defect < 1e-15);
        assert!(c.cone.is_proper(&t()).proper);
    }

    #[test]
    fn defect_shrinks_with_rotation() {
        let (co, si) = (0.9f64.cos(), 0.9f64.sin());
        let a = SquareMatrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 0.5 * co, -0.5 * si], vec![0.0, 0.5 * si, 0.5 * co]])
            .unwrap();
        let d: Vec<f64> = [4, 8, 12].iter().map(|&l| build(std::slice::from_ref(&a), l).defect).collect();
        assert!(d[1] <= d[0] + 1e-12 && d[2] <= d[1] + 1e-12, "{d:?}");
        assert!(d[2] < 1e-6);
    }
}
