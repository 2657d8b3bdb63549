//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by exact and floating computations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A denominator vanished exactly.
    #[error("pole encountered: {0}")]
    Pole(String),
    /// A floating-point denominator fell below the pole-guard tolerance.
    #[error("near-pole encountered: {0}")]
    NearPole(String),
    /// A rational function grows at infinity, so it has no Laurent
    /// expansion in 1/u there.
    #[error("function unbounded at infinity: {0}")]
    Unbounded(String),
    /// A site index left the admissible range [-n, n].
    #[error("index out of range: {0}")]
    Index(String),
    /// Operands live on incompatible spaces (different n or site count).
    #[error("shape mismatch: {0}")]
    Mismatch(String),
    /// Input parameters violate a genericity guard.
    #[error("genericity violation: {0}")]
    Genericity(String),
    /// No product basis vector is annihilated by the lower-triangular
    /// monodromy entries.
    #[error("no vacuum vector found among product basis states")]
    NoVacuum,
    /// The central-element sum failed to be proportional to the identity.
    #[error("centrality violation: {0}")]
    Centrality(String),
    /// A requested partition cardinality exceeds the set size.
    #[error("cardinality error: {0}")]
    Cardinality(String),
    /// The chain space is too large for dense diagonalization.
    #[error("dimension too large: {0}")]
    Dimension(String),
    /// A string failed to parse as an exact rational.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
