//! Simulation of Markovian open-system dynamics with majorization certificates.
//!
//! A Lindblad generator mixes every state (each later state is majorized by
//! each earlier one) exactly when it fixes the maximally mixed state,
//! `L(I) = 0`. The crate checks that criterion, integrates the master
//! equation, and produces checkable evidence along trajectories: doubly
//! stochastic matrices linking spectra, partial-sum slacks, and entropy and
//! purity traces.

pub mod channel;
pub mod error;
pub mod lindblad;
pub mod linalg;
pub mod majorization;
pub mod operators;
pub mod random;
pub mod spin;
pub mod state;

pub use error::{DensityViolation, Error, Result};
pub use linalg::{eig_hermitian, CMatrix, RMatrix, SpectralDecomposition};
pub use operators::{gell_mann_basis, OperatorBasis};
pub use state::{purity, validate_density, von_neumann_entropy, DensityMatrix, Tolerances};
