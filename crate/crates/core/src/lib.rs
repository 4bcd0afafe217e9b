//! Exact-arithmetic toolkit for the M2-rank of partitions without repeated
//! odd parts: generating functions as truncated q-series over cyclotomic
//! fields, generalized Lambert/Appell sums, congruence-subgroup cusp
//! bookkeeping, and machine certification of dissection identities by the
//! valence formula.
//!
//! Module map:
//! - [`cyclotomic`]: exact arithmetic in Q and Q(zeta_n)
//! - [`qseries`]: truncated Laurent-Puiseux series and the standard
//!   product constructors (Pochhammer, eta, generalized eta, theta)
//! - [`partitions`]: brute-force enumeration oracle for M2-rank counts
//! - [`mockforms`]: R2 generating function in its three forms, the S(k,c)
//!   Lambert series, and dissection-identity assembly
//! - [`modgroup`]: Gamma_0(N) ∩ Gamma_1(M) membership, cusps, widths,
//!   and the eta multiplier
//! - [`cusporders`]: invariant-order bounds at cusps
//! - [`certify`]: the valence-formula certification pipeline

pub mod certify;
pub mod cusporders;
pub mod cyclotomic;
pub mod error;
pub mod mockforms;
pub mod modgroup;
pub mod partitions;
pub mod qseries;

pub use cyclotomic::{CycNum, Rational};
pub use error::Error;
pub use qseries::{Frac, QSeries};

/// Convenience alias used throughout.
pub type Result<T> = std::result::Result<T, Error>;
