//! Monomial hyperplane arrangements A^k_l(r), the reflection arrangements of
//! the groups G(r,p,l), their intersection lattices and restrictions, and
//! numerical checks of the fibration of their complements over the braid
//! arrangement complement.

pub mod arrangement;
pub mod cli;
pub mod cyclotomic;
pub mod error;
pub mod fibration;
pub mod lattice;
pub mod numeric;
pub mod restriction;
pub mod topology;

pub use error::{Error, Result};
