//! Crate-wide error type.
//!
//! Every fallible contract in the crate reports through [`Error`]; callers
//! that hit a precondition violation get a description of what was violated
//! rather than a panic.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Arithmetic between cyclotomic numbers of distinct orders (> 1).
    OrderMismatch { left: u32, right: u32 },
    /// `embed` into an order not divisible by the current order.
    NonDivisibleOrder { from: u32, to: u32 },
    /// Rank-component projection applied to an element that is not fixed
    /// by complex conjugation; signals a bug in identity assembly.
    NotSymmetric,
    /// Division by zero or inversion of a non-unit.
    NotInvertible(String),
    /// Reading a series coefficient at or beyond the known precision.
    PrecisionExceeded { requested: String, prec: String },
    /// Series exponents do not lie on the lattice an operation requires.
    LatticeMismatch(String),
    /// An infinite product with a vanishing factor (e.g. `(q^0; q^m)`).
    ZeroProduct(String),
    /// The Lambert series `S(k,c)` at a parameter choice with a pole,
    /// i.e. `1 + 4k - c = 0 (mod 4c)`.
    LambertPole { k: i64, c: u32 },
    /// Numeric evaluation requested outside the upper half-plane.
    NotInUpperHalfPlane,
    /// Enumeration request above the configured cap.
    EnumerationCap { n: u64, cap: u64 },
    /// Cusp-set enumeration above the documented level bound.
    LevelBound { level: u64, bound: u64 },
    /// A mathematical precondition violated by the arguments (e.g. the
    /// root of unity degenerating to 1).
    Domain(String),
    /// Malformed identity file or series text.
    Parse(String),
    /// Certification cannot proceed (required precision above cap, bad g1
    /// reference, and similar).
    Certify(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OrderMismatch { left, right } => write!(
                f,
                "cyclotomic order mismatch: {left} vs {right} (embed into a common order first)"
            ),
            Error::NonDivisibleOrder { from, to } => {
                write!(f, "cannot embed zeta_{from} into zeta_{to}: {from} does not divide {to}")
            }
            Error::NotSymmetric => {
                write!(f, "element is not invariant under zeta -> zeta^-1; cannot project")
            }
            Error::NotInvertible(what) => write!(f, "not invertible: {what}"),
            Error::PrecisionExceeded { requested, prec } => write!(
                f,
                "coefficient at exponent {requested} is beyond the known precision {prec}"
            ),
            Error::LatticeMismatch(what) => write!(f, "exponent lattice mismatch: {what}"),
            Error::ZeroProduct(what) => write!(f, "identically zero product: {what}"),
            Error::LambertPole { k, c } => {
                write!(f, "S({k},{c}) has a pole: 1+4k-c = 0 (mod 4c)")
            }
            Error::NotInUpperHalfPlane => write!(f, "tau must satisfy Im(tau) > 0"),
            Error::EnumerationCap { n, cap } => write!(
                f,
                "n = {n} exceeds the enumeration cap {cap}; use the series-based oracle instead"
            ),
            Error::LevelBound { level, bound } => {
                write!(f, "level {level} exceeds the cusp-enumeration bound {bound}")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Certify(msg) => write!(f, "certification error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
