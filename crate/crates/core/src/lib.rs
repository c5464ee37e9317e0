//! Reconstruction of Hardy-space functions from samples on a subset `E` of
//! the unit disc, with certified two-sided bounds on the stability modulus
//! `C_p(eps, R)` and explicit uniqueness weights for non-Blaschke sequences.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod disc;
pub mod error;
pub mod extremal;
pub mod io;
pub mod models;
pub mod recovery;
pub mod stability;
pub mod uniqueness;

pub use error::{Error, Result};
pub use num_complex::Complex64;
