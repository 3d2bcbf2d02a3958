//! Hyperplane separation bounds on slack matrices of polytopes.

pub mod bounds;
pub mod error;
pub mod hsb;
pub mod labeled;
pub mod lp;
mod master;
pub mod matrix;
pub mod oracle;
pub mod scalar;
pub mod symmetry;
pub mod transforms;
pub mod zoo;

pub use error::{HsbError, Result};
pub use hsb::{
    compute_hsb, dual_from_json, dual_to_json, verify_dual_certificate, verify_primal_certificate,
    Certificate, HsbOptions, HsbResult, HsbStatus,
};
pub use labeled::{DynSlackMatrix, Label, LabelData, LabeledSlackMatrix};
pub use matrix::{Matrix, Rectangle};
pub use oracle::{rho_enumerate, rho_exact, rho_heuristic, RhoResult};
pub use scalar::{Rational, Scalar, ScalarMode};
pub use symmetry::{Automorphism, SymmetryGroup};
