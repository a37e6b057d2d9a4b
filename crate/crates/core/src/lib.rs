//! Radial polyharmonic Navier problems with point-charge data on balls in
//! ℝ^(2m): grids, discrete operators, Green's functions, monotone iteration
//! and asymptotic analysis of singular solutions.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod banded;
pub mod calculus;
pub mod error;
pub mod field;
pub mod greens;
pub mod grid;
pub mod iteration;
pub mod nonlinearity;

pub use error::{Error, Result};
pub use field::{ChargeVector, RadialField};
pub use greens::{navier_solve, NavierOptions, NavierSolution, SingularBasis};
pub use grid::{Grading, RadialGrid};
pub use nonlinearity::{Nonlinearity, Weight};
