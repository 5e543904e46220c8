//! Gate protocols: pulse schedules for the three gate variants, dressed-state
//! analytics, gate analysis and phase calibration.

mod analysis;
mod calibrate;
mod dressed;
mod schedules;

pub use analysis::{analyze_gate, wrap_phase, wrap_signed, GateReport};
pub use calibrate::{calibrate, Calibration, PHASE_TOLERANCE};
pub use dressed::{dressed_energies, entanglement_phase_integral, DressedCurves, DressedEnergies};
pub use schedules::{
    adiabatic_schedule, model_a_schedule, model_a_with_wait, model_b_schedule, AdiabaticPulse,
};
