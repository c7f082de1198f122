//! Default numeric tolerances.
//!
//! All constructions in this crate are exact mathematics evaluated in double
//! precision at dimensions 2-9, so residues sit far below these thresholds.
//! Every operation that takes a tolerance accepts an override; these are the
//! defaults threaded through constructors and the CLI.

/// Conjugate-symmetry tolerance for Hermitian validation.
pub const TAU_HERM: f64 = 1e-9;
/// Residual tolerance for operator sums (resolutions of identity, reconstructions).
pub const TAU_SUM: f64 = 1e-9;
/// Tolerance on traces and Born probabilities.
pub const TAU_TRACE: f64 = 1e-9;
/// Eigenvalue bound slack for effect / positive-semidefinite tests.
pub const TAU_EIG: f64 = 1e-8;
/// Absolute gap under which eigenvalues merge into one eigenspace.
pub const TAU_DEGEN: f64 = 1e-7;
/// Matrix-equality threshold for effect deduplication.
pub const TAU_DEDUP: f64 = 1e-9;

/// Bundle of tolerances, for callers that override them as a group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub sum: f64,
    pub trace: f64,
    pub eig: f64,
    pub degen: f64,
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: TAU_HERM,
            sum: TAU_SUM,
            trace: TAU_TRACE,
            eig: TAU_EIG,
            degen: TAU_DEGEN,
            dedup: TAU_DEDUP,
        }
    }
}

impl Tolerances {
    /// Scale the whole family from one base tolerance, keeping the default
    /// ratios (eigenvalue slack 10x, degeneracy gap 100x).
    pub fn from_base(base: f64) -> Self {
        Self {
            herm: base,
            sum: base,
            trace: base,
            eig: 10.0 * base,
            degen: 100.0 * base,
            dedup: base,
        }
    }
}
