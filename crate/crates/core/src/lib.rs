//! Finite-dimensional laboratory for unbounded order convergence, AL
//! representations and martingales in vector lattices.

// Negated comparisons such as `!(eps > 0.0)` are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convergence;
pub mod error;
pub mod filtration;
pub mod gallery;
pub mod lattice;
pub mod martingale;
pub mod matrix;
pub mod par;
pub mod random;
pub mod representation;
pub mod scalar;
pub mod suites;

pub use error::{Error, Result};
