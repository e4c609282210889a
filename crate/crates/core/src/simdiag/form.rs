//! Simultaneous diagonalization of commuting diagonalizable families.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense, eigen_decompose, family_dim, SquareMatrix, ToleranceConfig, MAX_DIM};

/// Number of random combinations tried for the reference matrix `B₀`.
pub const MAX_DRAWS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimDiagForm {
    /// Columns grouped by block; non-real blocks come in conjugate pairs.
    #[serde(with = "cmat_serde")]
    pub s: DMatrix<Complex64>,
    pub block_sizes: Vec<usize>,
    /// `lambda[i][j]`: eigenvalue of member `j` on block `i`.
    pub lambda: Vec<Vec<Complex64>>,
    /// Eigenvalues of `B₀` per block.
    pub b: Vec<Complex64>,
    pub family_size: usize,
    /// Coefficients of `B₀ = Σ c_j A_j`.
    pub coefficients: Vec<f64>,
}

mod cmat_serde {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Parts { re: rows(|z| z.re), im: rows(|z| z.im) }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let p = Parts::deserialize(d)?;
        let n = p.re.len();
        let m = p.re.first().map_or(0, |r| r.len());
        if p.im.len() != n || p.re.iter().chain(&p.im).any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("re and im parts must have equal shape"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| Complex64::new(p.re[i][j], p.im[i][j])))
    }
}

impl SimDiagForm {
    pub fn q(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// Column range of block `i`.
    pub fn block_range(&self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.block_sizes[..i].iter().sum();
        start..start + self.block_sizes[i]
    }

    pub fn is_real_block(&self, i: usize, tol: f64) -> bool {
        self.b[i].im.abs() <= tol * self.b[i].norm().max(1.0)
    }

    /// `S·diag(λ_{1j}I, …, λ_{qj}I)·S⁻¹`, real part.
    pub fn reconstruct(&self, j: usize) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let inv = self.s.clone().try_inverse().ok_or(Error::Singular)?;
        let mut d = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..self.q() {
            for c in self.block_range(i) {
                d[(c, c)] = self.lambda[i][j];
            }
        }
        Ok((&self.s * d * inv).map(|z| z.re))
    }
}

/// Checks pairwise commutation within `tol`.
pub fn check_commuting(family: &[SquareMatrix], tol: f64) -> Result<()> {
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if family[i].commutator_defect(&family[j]) > tol {
                return Err(Error::NotCommuting(i, j));
            }
        }
    }
    Ok(())
}

/// Checks that every member has only degree-1 eigenvalues.
pub fn check_diagonalizable(family: &[SquareMatrix], tol: &ToleranceConfig) -> Result<()> {
    for (i, a) in family.iter().enumerate() {
        let spec = eigen_decompose(a, tol)?;
        if spec.eigenvalues.iter().any(|e| e.degree > 1) {
            return Err(Error::NotDiagonalizable(i));
        }
    }
    Ok(())
}

fn commute_tol(tol: &ToleranceConfig) -> f64 {
    (tol.eig_cluster_tol * 100.0).max(tol.geom_tol)
}

struct Block {
    b: Complex64,
    cols: DMatrix<Complex64>,
    lambda: Vec<Complex64>,
}

/// Eigenspace blocks of `B₀`; `None` when some member is not scalar on a block.
fn blocks_for(family: &[SquareMatrix], b0: &SquareMatrix, tol: &ToleranceConfig) -> Result<Option<Vec<Block>>> {
    let n = b0.dim();
    let spec = eigen_decompose(b0, tol)?;
    let null_tol = (10.0 * tol.eig_cluster_tol).max(tol.rank_tol);
    let cb0 = dense::to_complex(b0.as_matrix());
    let mut blocks = Vec::new();
    for ev in &spec.eigenvalues {
        if ev.im < 0.0 {
            continue;
        }
        let z = ev.value();
        let shifted = &cb0 - DMatrix::<Complex64>::identity(n, n) * z;
        let mut cols = if ev.is_real() {
            let real = dense::null_space(&(b0.as_matrix() - DMatrix::identity(n, n) * ev.re), null_tol);
            dense::to_complex(&real)
        } else {
            dense::null_space(&shifted, null_tol)
        };
        if cols.ncols() != ev.multiplicity {
            return Ok(None);
        }
        if ev.is_real() {
            for mut c in cols.column_iter_mut() {
                let mut v: DVector<f64> = c.map(|x| x.re);
                dense::sign_normalize(&mut v);
                c.copy_from(&dense::to_complex(&DMatrix::from_column_slice(n, 1, v.as_slice())));
            }
        }
        let pinv = cols.adjoint();
        let mut lambda = Vec::with_capacity(family.len());
        for a in family {
            let ca = dense::to_complex(a.as_matrix());
            let restricted = &pinv * &ca * &cols;
            let s = cols.ncols();
            let l = restricted.trace() / Complex64::new(s as f64, 0.0);
            let resid = (&ca * &cols - &cols * l).norm();
            if resid > null_tol.sqrt() * a.norm().max(1.0) {
                return Ok(None);
            }
            lambda.push(if ev.is_real() { Complex64::new(l.re, 0.0) } else { l });
        }
        blocks.push(Block { b: z, cols: cols.clone(), lambda: lambda.clone() });
        if !ev.is_real() {
            blocks.push(Block {
                b: z.conj(),
                cols: cols.map(|x| x.conj()),
                lambda: lambda.iter().map(|l| l.conj()).collect(),
            });
        }
    }
    Ok(Some(blocks))
}

fn block_key(b: &Block) -> (usize, f64, f64) {
    let first = b.cols.column(0);
    let pos = (0..first.len())
        .max_by(|&i, &j| first[i].norm().total_cmp(&first[j].norm()).then(j.cmp(&i)))
        .unwrap_or(0);
    (pos, -b.b.re, -b.b.im)
}

/// Simultaneously diagonalizes a commuting family of diagonalizable matrices.
pub fn simultaneous_diagonalize(family: &[SquareMatrix], tol: &ToleranceConfig, seed: u64) -> Result<SimDiagForm> {
    let n = family_dim(family)?;
    if n > MAX_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    check_commuting(family, commute_tol(tol))?;
    check_diagonalizable(family, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<Block>, Vec<f64>)> = None;
    for _ in 0..MAX_DRAWS {
        let coeffs: Vec<f64> = (0..family.len()).map(|_| rng.random_range(0.5..1.5)).collect();
        let mut b0 = DMatrix::zeros(n, n);
        for (c, a) in coeffs.iter().zip(family) {
            b0 += a.as_matrix() * *c;
        }
        let b0 = SquareMatrix::new(b0)?;
        let Some(blocks) = blocks_for(family, &b0, tol)? else { continue };
        if best.as_ref().is_none_or(|(bb, _)| blocks.len() > bb.len()) {
            let full = blocks.len() == n;
            best = Some((blocks, coeffs));
            if full {
                break;
            }
        }
    }
    let (mut blocks, coefficients) =
        best.ok_or_else(|| Error::RefinementFailed(format!("no usable combination in {MAX_DRAWS} draws")))?;
    blocks.sort_by(|x, y| {
        let (a, b) = (block_key(x), block_key(y));
        a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2))
    });
    let cols: Vec<DVector<Complex64>> =
        blocks.iter().flat_map(|b| b.cols.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>()).collect();
    let form = SimDiagForm {
        s: DMatrix::from_columns(&cols),
        block_sizes: blocks.iter().map(|b| b.cols.ncols()).collect(),
        lambda: blocks.iter().map(|b| b.lambda.clone()).collect(),
        b: blocks.iter().map(|b| b.b).collect(),
        family_size: family.len(),
        coefficients,
    };
    let recon_tol = (1e3 * tol.eig_cluster_tol).max(1e-9);
    for (j, a) in family.iter().enumerate() {
        let r = form.reconstruct(j)?;
        if (r - a.as_matrix()).norm() > recon_tol * a.norm().max(1.0) {
            return Err(Error::RefinementFailed(format!("member {j} is not reconstructed")));
        }
    }
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn re(form: &SimDiagForm) -> Vec<Vec<f64>> {
        form.lambda.iter().map(|r| r.iter().map(|z| z.re).collect()).collect()
    }

    #[test]
    fn diagonal_pair() {
        let f = vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[3.0, 1.0])];
        let form = simultaneous_diagonalize(&f, &t(), 1).unwrap();
        assert_eq!(form.q(), 2);
        assert_eq!(re(&form), vec![vec![2.0, 3.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn three_axes() {
        let f = vec![SquareMatrix::diag(&[1.0, -1.0, -1.0]), SquareMatrix::diag(&[-1.0, -1.0, 1.0])];
        let form = simultaneous_diagonalize(&f, &t(), 1).unwrap();
        assert_eq!(form.q(), 3);
        let cols = re(&form);
        let a1: Vec<f64> = cols.iter().map(|r| r[0]).collect();
        let a2: Vec<f64> = cols.iter().map(|r| r[1]).collect();
        assert_eq!(a1, vec![1.0, -1.0, -1.0]);
        assert_eq!(a2, vec![-1.0, -1.0, 1.0]);
    }

    #[test]
    fn inverse_pair() {
        let a = SquareMatrix::diag(&[2.0, 0.5]);
        let b = SquareMatrix::diag(&[0.5, 2.0]);
        assert_eq!(simultaneous_diagonalize(&[a, b], &t(), 3).unwrap().q(), 2);
    }

    #[test]
    fn complex_block_reconstructs() {
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let a = SquareMatrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, c, -s], vec![0.0, s, c]]).unwrap();
        let b = SquareMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5]]).unwrap();
        let form = simultaneous_diagonalize(&[a.clone(), b], &t(), 5).unwrap();
        assert_eq!(form.q(), 3);
        assert!((form.reconstruct(0).unwrap() - a.as_matrix()).norm() < 1e-10);
        let json = serde_json::to_string(&form).unwrap();
        let back: SimDiagForm = serde_json::from_str(&json).unwrap();
        assert_eq!(back, form);
    }

    #[test]
    fn errors() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(simultaneous_diagonalize(&[a], &t(), 1), Err(Error::NotDiagonalizable(0)));
        let b = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = SquareMatrix::diag(&[1.0, 2.0]);
        assert_eq!(simultaneous_diagonalize(&[b, c], &t(), 1), Err(Error::NotCommuting(0, 1)));
    }
}
