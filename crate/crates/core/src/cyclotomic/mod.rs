//! Exact arithmetic in the cyclotomic fields Q(ζ_r) and linear algebra over
//! them.
//!
//! Elements are kept as rational coefficient vectors of their unique
//! representative modulo the r-th cyclotomic polynomial, so equality and
//! hashing are structural.

mod field;
mod matrix;
mod poly;

pub use field::{CycloField, CycloNum, FieldExt};
pub use matrix::CycloMatrix;
pub use poly::{cyclotomic_polynomial, IntPoly};


/// Arbitrary-precision rational, always held in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[cfg(test)]
mod proptests;
