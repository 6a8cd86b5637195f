//! Spectral laboratory for the fractional heat semigroup `e^{-t(-Δ)^α}`.
//!
//! The crate emulates whole-space analysis on a large periodic box and
//! provides the semigroup and Duhamel operators, the usual function-space
//! norms (mixed Lebesgue, Sobolev, Besov, BMO), ratio harnesses for
//! Strichartz-type estimates, and mild-solution solvers for the generalized
//! Navier–Stokes system and the potential-perturbed heat equation.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimates;
pub mod grid;
pub mod norms;
pub mod nse;
pub mod semigroup;

pub use error::{Error, Result};
pub use grid::{
    contamination, make_grid, read_field, synthesize_field, write_field, Direction, Field,
    GridSpec, Recipe, Representation, TimeSeries,
};
