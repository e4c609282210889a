//! Dense matrices, eigenstructure and the Vandergraft test.

pub mod dense;
pub mod eigen;
pub mod matrix;
pub mod tolerance;
pub mod vandergraft;
pub mod words;

pub use eigen::{eigen_decompose, Eigenvalue, Spectrum};
pub use matrix::{family_dim, SquareMatrix};
pub use tolerance::ToleranceConfig;
pub use vandergraft::{is_vandergraft, VandergraftFailure, VandergraftReport};
pub use words::enumerate_words;

/// Largest supported dimension.
pub const MAX_DIM: usize = 32;

/// Serde adapters writing vectors as plain JSON arrays.
pub mod vec_serde {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }

    pub mod list {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[DVector<f64>], s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<&[f64]> = v.iter().map(|x| x.as_slice()).collect();
            rows.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DVector<f64>>, D::Error> {
            Ok(Vec::<Vec<f64>>::deserialize(d)?.into_iter().map(DVector::from_vec).collect())
        }
    }

    pub mod opt_list {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<DVector<f64>>>, s: S) -> Result<S::Ok, S::Error> {
            v.as_ref()
                .map(|x| x.iter().map(|y| y.as_slice().to_vec()).collect::<Vec<_>>())
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<DVector<f64>>>, D::Error> {
            Ok(Option::<Vec<Vec<f64>>>::deserialize(d)?
                .map(|x| x.into_iter().map(DVector::from_vec).collect()))
        }
    }
}

/// Serde adapter writing a matrix as a list of rows.
pub mod mat_serde {
    use nalgebra::DMatrix;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
    }

    pub mod list {
        use nalgebra::DMatrix;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        #[serde(transparent)]
        struct Rows(#[serde(with = "super")] DMatrix<f64>);

        pub fn serialize<S: Serializer>(v: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|m| Rows(m.clone())).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
            Ok(Vec::<Rows>::deserialize(d)?.into_iter().map(|r| r.0).collect())
        }
    }
}
