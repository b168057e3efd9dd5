//! Exact arithmetic in nilpotent Lie algebras and their simply connected
//! groups, identified with the algebra through the exponential map.

mod algebra;
pub mod bch;
mod subspace;

pub use algebra::{LieAlgebra, Quotient, ValidationReport};
pub use subspace::Subspace;
