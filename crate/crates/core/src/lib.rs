//! Exact continued-fraction arithmetic and L_p lattice geometry for
//! classifying Dirichlet-improvable numbers.
//!
//! The crate is organized around five layers:
//!
//! * [`cf`] — continued fractions: digits, convergents, continuants,
//!   cylinder intervals, and the normalized best-approximation function
//!   together with its limit constants.
//! * [`geometry`] — the L_p plane: unit-ball geometry, the critical
//!   determinant with its phase transition, and the catalog of critical
//!   lattices for each exponent regime.
//! * [`flow`] — the diagonal-flow picture: successive minima of the
//!   deformed lattice of a number, detection of times where the shortest
//!   vector changes, and distance-to-critical-locus diagnostics.
//! * [`classifier`] — digit-pattern scanning and the improvability verdict
//!   for finite, periodic, and analytically known expansions.
//! * [`witness`] — constructions that produce numbers lying in prescribed
//!   differences of improvability classes, plus badly-approximable
//!   witnesses with certified growth conditions.
//!
//! All continued-fraction quantities are computed in exact big-rational
//! arithmetic; transcendental steps (p-th powers, logarithms) go through
//! [`real::Real`], an arbitrary-precision float wrapper.

pub mod cf;
pub mod classifier;
pub mod error;
pub mod witness;
pub mod flow;
pub mod geometry;
pub mod real;

pub use error::{Error, Result};
