//! Simulator for one-step GHZ-state generation in a chain of fiber-coupled
//! cavities, driven either by fractional STIRAP or by a transitionless
//! (counter-diabatic) shortcut emulated through a detuned, adiabatically
//! eliminated Zeno subspace.
//!
//! The crate is organised bottom-up:
//!
//! - [`hilbert`]: atom levels, bosonic modes, reachable-basis closure and
//!   elementary operators.
//! - [`model`]: physical parameters, the coupling/laser/detuning Hamiltonians
//!   and the Lindblad jump operators.
//! - [`zeno`]: closed-form and numeric eigensystems of the coupling
//!   Hamiltonian, Zeno projectors and the reduced three-level models.
//! - [`pulses`]: the Gaussian pulse pair, the mixing angle and the
//!   counter-diabatic pulse.
//! - [`dynamics`]: fixed-step RK4 integration of the Schrödinger and Lindblad
//!   equations.
//! - [`observables`]: populations, GHZ fidelities and leakage.
//! - [`experiments`]: scenario registry and the parallel sweep engine.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod pulses;
pub mod zeno;

pub use error::{Error, Result, Violation};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
