//! Exact set arithmetic over the rationals for sum-product experiments.

pub mod checks;
pub mod expr;
pub mod factor;
pub mod harness;
pub mod incidence;
pub mod rational;
pub mod set;
pub mod sunit;

pub use rational::{Rational, RationalError};
pub use set::FiniteSet;
