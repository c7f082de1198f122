//! Noncontextuality workbench core.
//!
//! Dense Hermitian operator algebra, POVM post-processing and Naimark
//! dilation, finite ontological models with generalized-noncontextuality
//! checks, value/probability assignment feasibility over effect sets, and
//! the discrete Wigner model for the single-qutrit stabilizer fragment.

pub mod assign;
pub mod error;
pub mod measurement;
pub mod ontology;
pub mod operator;
pub mod report;
pub mod tol;
pub mod wigner;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
