//! Built-in families.

use conelab::cones2d::from_eigenpairs;
use conelab::{Answer, SquareMatrix};
use nalgebra::DMatrix;

use crate::schema::FamilyFile;

pub struct Fixture {
    pub name: String,
    pub summary: &'static str,
    pub members: Vec<SquareMatrix>,
    pub labels: Vec<String>,
    /// Answer of `common --method auto`.
    pub expected: Answer,
}

impl Fixture {
    pub fn file(&self) -> FamilyFile {
        FamilyFile::new(&self.members, Some(self.labels.clone()))
    }
}

pub const NAMES: &[&str] = &[
    "negdet-pair",
    "pairwise-triple",
    "two-commuting-pairs",
    "jordan-pair",
    "diagonal-sign-pair",
    "growing-shear-<m>",
    "orthant-pair",
    "damped-rotation",
    "commuting-triple",
    "lorentz-rotations",
    "sheared-contraction",
    "axis-normal-pair",
];

fn rows(r: &[&[f64]]) -> SquareMatrix {
    SquareMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).expect("fixture matrix")
}

fn eig(u1: [f64; 2], u2: [f64; 2]) -> SquareMatrix {
    from_eigenpairs(2.0, &u1, 1.0, &u2).expect("independent eigenvectors")
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn conj(s: &DMatrix<f64>, d: &[f64]) -> SquareMatrix {
    let inv = s.clone().try_inverse().expect("invertible");
    SquareMatrix::new(s * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)) * inv).expect("finite")
}

fn rot_block(lead: f64, scale: f64, th: f64) -> SquareMatrix {
    let (c, s) = (th.cos(), th.sin());
    rows(&[&[lead, 0.0, 0.0], &[0.0, scale * c, -scale * s], &[0.0, scale * s, scale * c]])
}

/// Upper triangular shears `[[1, t], [0, 1/2]]` for `t = 1..=m`.
pub fn growing_shear(m: usize) -> Vec<SquareMatrix> {
    (1..=m).map(|t| rows(&[&[1.0, t as f64], &[0.0, 0.5]])).collect()
}

/// Dominant eigenvectors of the pairwise triple, in member order.
pub const TRIPLE_DOMINANT: [[f64; 2]; 3] = [[1.0, 0.0], [1.0, 2.0], [1.0, -2.0]];

pub fn get(name: &str) -> Option<Fixture> {
    let (summary, members, names, expected): (&str, Vec<SquareMatrix>, Vec<String>, Answer) = match name {
        "negdet-pair" => (
            "two negative-determinant shears; every word is Vandergraft, no common cone",
            vec![rows(&[&[1.0, 1.0], &[0.0, -1.0]]), rows(&[&[1.0, 2.0], &[0.0, -1.0]])],
            labels(&["A", "B"]),
            Answer::No,
        ),
        "pairwise-triple" => (
            "three normal matrices, each pair has a common cone, the triple does not",
            vec![
                eig([1.0, 0.0], [0.0, 1.0]),
                eig(TRIPLE_DOMINANT[1], [-2.0, 1.0]),
                eig(TRIPLE_DOMINANT[2], [2.0, 1.0]),
            ],
            labels(&["A", "B", "C"]),
            Answer::No,
        ),
        "two-commuting-pairs" => (
            "four matrices, every triple has a common cone, the quadruple does not",
            vec![
                eig([1.0, 0.0], [0.0, 1.0]),
                eig([0.0, 1.0], [1.0, 0.0]),
                eig([1.0, 1.0], [1.0, -1.0]),
                eig([1.0, -1.0], [1.0, 1.0]),
            ],
            labels(&["A", "B", "C", "D"]),
            Answer::No,
        ),
        "jordan-pair" => (
            "opposite Jordan shears sharing the dominant line",
            vec![rows(&[&[1.0, 1.0], &[0.0, 1.0]]), rows(&[&[1.0, -1.0], &[0.0, 1.0]])],
            labels(&["A", "B"]),
            Answer::No,
        ),
        "diagonal-sign-pair" => (
            "diagonal sign matrices whose words are all Vandergraft, no common cone",
            vec![SquareMatrix::diag(&[1.0, -1.0, -1.0]), SquareMatrix::diag(&[-1.0, -1.0, 1.0])],
            labels(&["A1", "A2"]),
            Answer::No,
        ),
        "orthant-pair" => (
            "two positive diagonal matrices",
            vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[3.0, 1.0])],
            labels(&["A", "B"]),
            Answer::Yes,
        ),
        "damped-rotation" => (
            "dominant axis plus a contracting rotation",
            vec![rot_block(2.0, 0.5, 0.9)],
            labels(&["A"]),
            Answer::Yes,
        ),
        "commuting-triple" => {
            let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.1, 1.0, 0.3, 0.0, -0.2, 1.0]);
            (
                "three commuting matrices diagonal in a shared skewed basis",
                vec![conj(&s, &[3.0, 1.0, -0.5]), conj(&s, &[2.0, 1.5, 1.0]), conj(&s, &[1.0, 0.5, 0.25])],
                labels(&["A", "B", "C"]),
                Answer::Yes,
            )
        }
        "lorentz-rotations" => (
            "rotations about a common dominant axis",
            vec![rot_block(2.0, 1.0, 0.3), rot_block(2.0, 1.5, 1.1)],
            labels(&["A", "B"]),
            Answer::Yes,
        ),
        "sheared-contraction" => {
            let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.7, 0.0, 0.0, 1.0]);
            (
                "commuting non-normal matrices with a shared dominant eigenvector",
                vec![conj(&s, &[1.0, 0.5, -0.5]), conj(&s, &[1.0, -0.3, 0.3])],
                labels(&["A", "B"]),
                Answer::Yes,
            )
        }
        "axis-normal-pair" => (
            "non-commuting normal matrices fixing a common dominant axis",
            vec![
                rows(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.5], &[0.0, 0.5, 0.0]]),
                rot_block(2.0, 0.5, 0.7),
            ],
            labels(&["A", "B"]),
            Answer::Yes,
        ),
        _ => {
            let m: usize = name.strip_prefix("growing-shear-")?.parse().ok().filter(|&m| m >= 1)?;
            (
                "growing shears [[1, t], [0, 1/2]], t = 1..m",
                growing_shear(m),
                (1..=m).map(|t| format!("A{t}")).collect(),
                Answer::Yes,
            )
        }
    };
    Some(Fixture { name: name.into(), summary, members, labels: names, expected })
}
