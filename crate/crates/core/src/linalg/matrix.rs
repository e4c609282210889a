use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense real square matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
            }
        }
        Ok(SquareMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != n * n {
            return Err(Error::NotSquare { rows: n, cols: entries.len() / n.max(1) });
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        SquareMatrix(DMatrix::identity(n, n))
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        SquareMatrix(DMatrix::identity(n, n) * c)
    }

    pub fn diag(d: &[f64]) -> Self {
        SquareMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn transpose(&self) -> SquareMatrix {
        SquareMatrix(self.0.transpose())
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 * &other.0)
    }

    pub fn scale(&self, c: f64) -> SquareMatrix {
        SquareMatrix(&self.0 * c)
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    pub fn pow(&self, k: u32) -> SquareMatrix {
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            acc = &acc * &self.0;
        }
        SquareMatrix(acc)
    }

    /// Returns `Some(c)` when the matrix equals `c·I` up to `tol·max(1, ‖A‖)`.
    pub fn scalar_value(&self, tol: f64) -> Option<f64> {
        let n = self.dim();
        let c = self.trace() / n as f64;
        let dev = (&self.0 - DMatrix::identity(n, n) * c).norm();
        (dev <= tol * self.norm().max(1.0)).then_some(c)
    }

    /// `‖AB − BA‖_F / (‖A‖_F ‖B‖_F)`, zero when either factor is zero.
    pub fn commutator_defect(&self, other: &SquareMatrix) -> f64 {
        let scale = self.norm() * other.norm();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.0 * &other.0 - &other.0 * &self.0).norm() / scale
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

impl Deref for SquareMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SquareMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Checks that every member is square of the same dimension as the first.
pub fn family_dim(family: &[SquareMatrix]) -> Result<usize> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    let n = first.dim();
    for m in family {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    Ok(n)
}
