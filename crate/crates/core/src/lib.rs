//! Numerical laboratory for random multiplicative functions on short intervals.
//!
//! A random multiplicative function assigns independent fair signs `X(p)` to
//! primes and extends them to square-free integers by multiplicativity
//! (`X(n) = 0` when `n` has a square factor). This crate sieves short
//! intervals `(x, x+y]`, simulates the normalized interval sum
//! `W = S^{-1/2} Σ X(n)`, counts square quadruples exactly to obtain the
//! fourth moment, evaluates the ingredients of the Stein-method bound, and
//! measures the distance of sampled `W` values from the standard normal.
//!
//! Floating point code is generic over [`Real`] (`f32` or `f64`); exact
//! identities are evaluated over [`Rational`]. The `*64` aliases below are
//! what the harness uses.

pub mod bounds;
pub mod distances;
mod error;
pub mod harness;
pub mod numtheory;
pub mod quadruples;
pub mod rmf;
mod scalar;
pub mod stein;

pub use error::{LabError, Result};
pub use numtheory::{IntervalTable, PrimeSplit};
pub use rmf::{SignSource, WStatistic};
pub use scalar::{Rational, Real};

/// Empirical sample in double precision.
pub type SampleSet64 = distances::SampleSet<f64>;
/// Empirical sample in single precision.
pub type SampleSet32 = distances::SampleSet<f32>;
/// Bound inputs in double precision.
pub type BoundInputs64 = bounds::BoundInputs<f64>;
/// Normalized interval statistic in double precision.
pub type WStatistic64 = WStatistic<f64>;
