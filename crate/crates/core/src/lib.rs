//! Two-atom Rydberg phase-gate simulator.
//!
//! The crate is organised bottom-up:
//!
//! * [`atomic_structure`]: linear Stark shifts, permanent dipole moments and the
//!   diagonal dipole-dipole interaction between two Stark states.
//! * [`internal_dynamics`]: the nine-level two-atom Hamiltonian with laser
//!   controls and Rydberg loss, pulse schedules and an adaptive propagator.
//! * [`gate_protocols`]: pulse sequences for the three gate schemes, dressed-state
//!   analytics, gate-phase extraction and phase calibration.
//! * [`motional_errors`]: perturbative motional bounds and joint
//!   internal/oscillator simulations.
//! * [`scenario`]: scenario files, runs, sweeps and their on-disk artifacts.
//!
//! Frequencies are angular (rad/s) everywhere, with ħ = 1 inside Hamiltonians.

pub mod atomic_structure;
pub mod error;
pub mod gate_protocols;
pub mod integrate;
pub mod internal_dynamics;
pub mod linalg;
pub mod motional_errors;
pub mod scenario;

mod dop853_tableau;

pub use error::{Error, Result};
