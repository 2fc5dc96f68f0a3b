//! Numerical laboratory for sharp Sobolev inequalities on weighted
//! one-dimensional model spaces and finite metric measure spaces.

// `!(x > 0.0)` is the NaN-rejecting guard used throughout; the Lanczos and
// quadrature tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod concentration;
pub mod constants;
pub mod error;
pub mod quadrature;

pub use constants::Extended;
pub use error::{Error, Result};
pub mod mm_geometry;
pub mod model_spaces;
pub mod rearrangement;
pub mod seeding;
pub mod sobolev_solver;
pub mod yamabe;
mod fit;
mod linalg;
