//! Numerical Wiman–Valiron laboratory for functions in the unit disc.
//!
//! * [`function_model`] describes test functions and evaluates `log f`,
//!   derivative towers and tract membership without overflow.
//! * [`growth`] samples `B(r)`, `a(r)`, `eps(r)` and the order of growth.
//! * [`exceptional`] measures where the regularity conditions fail.
//! * [`verifier`] checks the local monomial and logarithmic-derivative
//!   asymptotics around the maximum point `z_r`.

// Negated comparisons are deliberate: they treat NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exceptional;
pub mod function_model;
pub mod growth;
pub mod numeric;
pub mod verifier;

pub use error::{Error, Result};
