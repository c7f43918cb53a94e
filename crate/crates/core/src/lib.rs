//! Exact computations around quiver moment maps, Kleinian groups, symplectic
//! reflection algebras and type-A transversal slices.
//!
//! All arithmetic is exact. Rationals are [`scalars::Rational`], group data
//! lives over cyclotomic fields ([`scalars::CycScalar`]), and tangent
//! computations use first-order jets ([`scalars::Jet`]).

pub mod cli;
pub mod error;
pub mod mckay;
pub mod ncalg;
pub mod params;
pub mod quiver;
pub mod roots;
pub mod scalars;
pub mod selftest;
pub mod typea;

pub use error::{Error, Result};
