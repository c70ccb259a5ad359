//! Numerical laboratory for nonlocal vortex energies.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod currents;
pub mod energy;
pub mod error;
pub mod fields;
pub mod kernels;
pub mod lattice;
pub mod quadrature;

pub use error::{Error, Result};
