//! Executable machinery for quasiconformal conjugation problems on nilpotent
//! Lie groups: exact Lie algebra and BCH arithmetic, Heintze pair flags,
//! homogeneous quasi-norms, SPD circumcenters, isometric graded automorphism
//! groups and box-modulus formulas.

pub mod conformal;
pub mod corpus;
pub mod error;
pub mod field;
pub mod heintze;
pub mod io;
pub mod iso_aut;
pub mod lie;
pub mod linalg;
pub mod metric;
pub mod modulus;
pub mod spd;
pub mod surd;

pub use error::{Error, Result};
pub use field::{Field, Rational, Scalar};
pub use lie::{LieAlgebra, Subspace};
pub use linalg::Matrix;
