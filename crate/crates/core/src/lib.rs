//! Murmuration densities for elliptic curves ordered by naive height.
//!
//! The empirical side streams a_n(E) for every curve, bins them on a
//! window grid and averages. The predicted side sums Bessel functions
//! against exact local factors.

pub mod arith;
pub mod curves;
pub mod error;
pub mod frobenius;
pub mod grid;
pub mod lhs;
pub mod localfactors;
pub mod reduction;
pub mod rhs;

pub use curves::{CurveSeed, HeightBound};
pub use error::{Error, Result};
