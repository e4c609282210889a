//! Invariant cones of 2×2 matrices and common invariant cones of 2×2 families.

pub mod family;
pub mod frame;

pub use family::{
    decide_common_2x2, decide_shared_dominant_2x2, extended_family, minimal_bad_subfamily, necessary_conditions,
    refute_search, ExtendedMember, NecessaryReport, SeparationArc,
};
pub use frame::{
    associated_sign, classify2, from_eigenpairs, is_invariant_cone_2x2, make_invariant_cone, EigenFrame2, Kind2, Sign, VAvCone,
};
