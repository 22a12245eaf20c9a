//! Finite volume evolution Galerkin scheme for the two-dimensional shallow
//! water equations over variable bathymetry with wetting and drying.

// Negated comparisons are deliberate: NaN has to take the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Axis loops index several parallel arrays.
#![allow(clippy::needless_range_loop)]

pub mod boundary;
pub mod driver;
pub mod evolution;
pub mod mesh;
pub mod reconstruction;
pub mod scenarios;
pub mod solver;
pub mod state;
