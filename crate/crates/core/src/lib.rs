//! Exact counting and asymptotic cumulant expansions for Eulerian orientations.
//!
//! The crate is organised around a handful of layers:
//!
//! - [`graph`]: simple graphs, Laplacians, spanning-tree counts and Cheeger constants.
//! - [`exact`]: ground-truth counters (brute force, the regular-tournament recurrence,
//!   and a low-dimensional quadrature of the torus integral).
//! - [`gaussian`]: Isserlis pairings, connected-pairing joint cumulants and the
//!   ring-generic moment/cumulant conversion.
//! - [`laurent`] and [`ptypes`]: truncated series in `1/n` and the partition-type
//!   engine for moments of power sums of i.i.d. Gaussians.
//! - [`expansion`]: the exponent series for regular tournaments, Eulerian digraphs
//!   and Eulerian oriented graphs.
//! - [`estimator`]: the cumulant-corrected estimate for general graphs.
//! - [`taillab`]: exhaustive checks of the cumulant tail bound on finite product spaces.

// Index loops read more naturally in the matrix and table code.
#![allow(clippy::needless_range_loop)]

pub mod combinat;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod expansion;
pub mod gaussian;
pub mod graph;
pub mod hp;
pub mod laurent;
pub mod ptypes;
pub mod rational;
pub mod taillab;

pub use error::{Error, Result};
pub use graph::Graph;
pub use laurent::LaurentSeries;

/// Arbitrary-precision integer used for every exact count.
pub type ExactInteger = num_bigint::BigInt;
/// Arbitrary-precision rational used for every exact coefficient.
pub type ExactRational = num_rational::BigRational;
