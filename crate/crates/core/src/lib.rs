//! Numerical core for a two-dimensional, two-state conical-intersection model.
//!
//! The model consists of two shifted harmonic diabatic surfaces coupled
//! linearly along one coordinate. The crate builds five Hamiltonians on a
//! uniform real-space grid — the full two-state model, the single-surface
//! Born–Oppenheimer (BO) model, the BO model with the geometric-phase (GP)
//! vector potential, and the uncoupled donor/acceptor oscillators — and
//! provides:
//!
//! - closed-form potentials, the diabatic mixing angle and its gradient
//!   ([`model`]),
//! - grid storage, stencils and inner products ([`grid`]),
//! - matrix-free Hermitian operator application ([`operators`]),
//! - a thick-restart block Lanczos eigensolver with degeneracy and parity
//!   classification ([`spectra`]),
//! - donor-well localization measures, delocalization curves and the
//!   localization phase diagram ([`localization`]),
//! - thermal-ensemble preparation and unitary propagation of the donor
//!   population ([`dynamics`]).
//!
//! Energies are in units of ħω₁ (ħ = 1, mass-weighted coordinates).

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod localization;
pub mod model;
pub mod operators;
pub mod spectra;

pub use error::CisimError;
pub use grid::{Field, GridSpec, ScalarField, SpinorField, StencilOrder};
pub use model::ModelParams;
pub use operators::{Hamiltonian, HamiltonianKind};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CisimError>;
