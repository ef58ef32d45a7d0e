//! Modular-inverse point sets on the 2-torus.
//!
//! The central object is the set of points `(d/q, d̄/q)` where `d` runs over
//! the units modulo `q` and `d̄` is the inverse of `d`.  This crate builds
//! those sets, evaluates the exponential sums (Kloosterman sums, twisted and
//! coset variants) that control their Fourier coefficients, and measures how
//! uniformly they fill the torus: discrepancy, small-scale ball counts,
//! variance of ball measures, covering radii, sparse coset equidistribution,
//! and mixing of multiplicative translates.
//!
//! Modules:
//!
//! * [`arith`] — factorization, unit groups, subgroups/cosets, Dirichlet characters;
//! * [`expsum`] — Kloosterman sums (direct, batched, twisted), Weil bounds,
//!   coset Weyl sums, mixing coefficients, pair counts;
//! * [`kernels`] — Bessel `J0`/`J1`, Fourier coefficients of hard and mollified
//!   ball kernels, certified truncation, Parseval checks;
//! * [`torusgeo`] — the point sets themselves, toroidal metric, grid index,
//!   ball/covering computations, reproducible random baselines;
//! * [`stats`] — the statistics as report-producing operations.
//!
//! All values are immutable once constructed and all operations are pure, so
//! everything here is safe to share across threads.  Reductions are performed
//! in a fixed order, so results do not depend on the number of worker threads.

pub mod arith;
pub mod expsum;
pub mod kernels;
pub mod numeric;
pub mod stats;
pub mod torusgeo;

use std::fmt;

/// Errors shared by all modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument violates a documented precondition.
    InvalidArgument(String),
    /// A residue is not invertible modulo `q`.
    NotAUnit { d: u64, q: u64 },
    /// The modulus does not support the requested structure
    /// (non-cyclic unit group, or an even part divisible by 8).
    UnsupportedModulus(String),
    /// A subgroup index that does not divide the group order.
    InvalidIndex(String),
    /// A configured resource cap would be exceeded.
    ResourceLimit(String),
    /// A radius outside the range served by this computation path.
    UnsupportedRadius(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NotAUnit { d, q } => write!(f, "{d} is not a unit modulo {q}"),
            Error::UnsupportedModulus(msg) => write!(f, "unsupported modulus: {msg}"),
            Error::InvalidIndex(msg) => write!(f, "invalid index: {msg}"),
            Error::ResourceLimit(msg) => write!(f, "resource limit: {msg}"),
            Error::UnsupportedRadius(msg) => write!(f, "unsupported radius: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
