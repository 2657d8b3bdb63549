//! Exact-arithmetic algebraic Bethe ansatz toolkit for o(2n+1)-invariant
//! quantum spin chains.
//!
//! The crate instantiates finite inhomogeneous chains built from the
//! o(2n+1)-invariant rational R-matrix and verifies, as exact identities
//! between finite matrices over arbitrary-precision rationals:
//!
//! - Yang-Baxter, unitarity and the RTT exchange relation ([`rmatrix`],
//!   [`monodromy`]);
//! - the central-element relation and the induced constraints on vacuum
//!   eigenvalues ([`monodromy`]);
//! - zero-mode commutation relations extracted from the 1/u expansion of
//!   the monodromy ([`monodromy`]);
//! - recursive construction of off-shell Bethe vectors, the partition-sum
//!   action formula for all monodromy entries, zero-mode and corner
//!   actions, and the gl(n) / o(3) reduction checks ([`bethe`],
//!   [`partitions`]);
//! - Bethe equations, a floating-point Newton solver, transfer-matrix
//!   eigenvalues and exact-diagonalization cross-checks ([`spectra`]).
//!
//! Exact scalars are reduced big rationals; the float backend is confined
//! to the spectrum pipeline.  See the `acceptance` integration test for
//! the end-to-end identity suite.

pub mod bethe;
pub mod error;
pub mod linop;
pub mod monodromy;
pub mod partitions;
pub mod ratfun;
pub mod spectra;
pub mod rmatrix;
pub mod scalar;


pub use error::{Error, Result};
pub use scalar::{C64, Rat};
