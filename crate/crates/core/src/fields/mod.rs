//! Domains and test fields.

mod domain;
mod field;

pub use domain::{Domain, Shape2};
pub use field::{Atom, Field, Rule, SampledGrid, ATOM_NUDGE_RADIUS};
