//! Consistent-histories analysis of measurements of commuting observables.
//!
//! The crate models a particle measured by an apparatus built from unitary
//! stages (path splitter, nondestructive path detectors, a per-path context
//! unitary, a second splitter, and final detectors), evaluates history
//! families with the decoherence functional, and checks that the outcome
//! recorded for an observable `A` does not depend on which commuting partner
//! is measured alongside it.
//!
//! Modules, bottom-up:
//!
//! - [`linalg`]: dense complex kets and operators, tensor products, unitary
//!   completion of partial isometries.
//! - [`spectral`]: Hermitian eigensolver, spectral decompositions, projective
//!   decompositions, simultaneous eigenbases of commuting observables.
//! - [`histories`]: history families, chain vectors, decoherence matrix,
//!   consistency, probabilities and conditionals.
//! - [`apparatus`]: the three-state apparatus and its generalization to any
//!   commuting pair, plus a direct statevector oracle.
//! - [`scenarios`]: the canonical observables and the noncontextuality
//!   experiment runner.

#![forbid(unsafe_code)]

pub mod apparatus;
pub mod error;
pub mod histories;
pub mod linalg;
pub mod sampling;
pub mod scenarios;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{Ket, Operator, PartialIsometryMap, C64};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Structural predicates: hermitian, unitary, projector, orthonormality.
    pub const STRUCT: f64 = 1e-10;
    /// State normalization.
    pub const NORM: f64 = 1e-12;
    /// Eigenvalues closer than this are merged into one projector.
    pub const CLUSTER: f64 = 1e-8;
    /// Largest off-diagonal decoherence-matrix magnitude for a consistent family.
    pub const CONSISTENCY: f64 = 1e-8;
    /// Conditioning events at or below this probability are rejected.
    pub const PROBABILITY: f64 = 1e-12;
}
