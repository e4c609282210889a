//! Common invariant proper cones for finite families of real square matrices.
//!
//! Decision procedures return a witness cone when a common invariant cone
//! exists and a named failed condition when it provably does not. Every
//! witness is re-checked by the membership oracle in [`cone`].

pub mod cone;
pub mod cones2d;
pub mod decision;
pub mod simdiag;
pub mod error;
pub mod linalg;
pub mod shared;

pub use decision::{Answer, Certificate, FailedCondition, FamilyDecision};
pub use error::{Error, Hypothesis, Result};
pub use linalg::{SquareMatrix, ToleranceConfig};
