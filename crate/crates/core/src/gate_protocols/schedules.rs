use std::f64::consts::PI;

use crate::internal_dynamics::{Envelope, PulseSchedule, PulseSegment};
use crate::{Error, Result};

/// Model A: π-pulse on both atoms, wait φ/|u|, π-pulse on both atoms.
///
/// Valid for Ω ≫ |u|; a warning is logged when Ω < 10|u|.
pub fn model_a_schedule(omega: f64, u: f64, phi_target: f64) -> Result<PulseSchedule> {
    if u == 0.0 {
        return Err(Error::domain("u = 0 requires an infinite wait in model A"));
    }
    if !(phi_target > 0.0 && phi_target <= 2.0 * PI) {
        return Err(Error::domain(format!(
            "target phase must lie in (0, 2pi], got {phi_target}"
        )));
    }
    if omega.abs() < 10.0 * u.abs() {
        log::warn!("model A expects Omega >> |u| (Omega = {omega:.3e}, u = {u:.3e})");
    }
    model_a_with_wait(omega, phi_target / u.abs())
}

/// Model A with an explicit wait time; the calibration family for the wait knob.
pub fn model_a_with_wait(omega: f64, wait: f64) -> Result<PulseSchedule> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::domain("model A needs a non-zero Rabi frequency"));
    }
    let pi_pulse = PulseSegment::rectangular(PI / omega.abs(), omega, omega)?;
    PulseSchedule::new(vec![pi_pulse.clone(), PulseSegment::idle(wait)?, pi_pulse])
}

/// Model B: π on atom 1, 2π on atom 2, π on atom 1 (unperturbed pulse areas).
///
/// Valid for |u| ≫ Ωⱼ; a warning is logged when |u| < 10 Ωⱼ.
pub fn model_b_schedule(omega1: f64, omega2: f64, u: f64) -> Result<PulseSchedule> {
    if omega1 == 0.0 || omega2 == 0.0 || !omega1.is_finite() || !omega2.is_finite() {
        return Err(Error::domain(
            "model B needs non-zero Rabi frequencies on both atoms",
        ));
    }
    if u.abs() < 10.0 * omega1.abs().max(omega2.abs()) {
        log::warn!(
            "model B expects |u| >> Omega (u = {u:.3e}, Omega = {omega1:.3e}, {omega2:.3e})"
        );
    }
    let first = PulseSegment::rectangular(PI / omega1.abs(), omega1, 0.0)?;
    let second = PulseSegment::rectangular(2.0 * PI / omega2.abs(), 0.0, omega2)?;
    PulseSchedule::new(vec![first.clone(), second, first])
}

/// Pulse shape of the adiabatic gate, applied identically to both atoms.
///
/// Ω(t) = Ω₀ sin²(πt/Δt) and δ(t) dips from δ₀ at the edges to `delta_min` at
/// mid-pulse along the same sin² profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticPulse {
    pub omega0: f64,
    pub delta0: f64,
    pub delta_min: f64,
}

impl AdiabaticPulse {
    /// Ω₀ = 100 MHz and δ₀ = 1.7 GHz (angular); δ dips to 50 MHz.
    pub const REFERENCE: AdiabaticPulse = AdiabaticPulse {
        omega0: 1.0e8,
        delta0: 1.7e9,
        delta_min: 5.0e7,
    };
}

pub fn adiabatic_schedule(pulse: &AdiabaticPulse, duration: f64) -> Result<PulseSchedule> {
    if pulse.omega0 * duration < 20.0 {
        log::warn!(
            "adiabatic gate with Omega0 * dt = {:.1} < 20 may not follow the dressed states",
            pulse.omega0 * duration
        );
    }
    let seg = PulseSegment::symmetric(
        duration,
        Envelope::SinSquaredBump {
            edge: 0.0,
            center: pulse.omega0,
        },
        Envelope::SinSquaredBump {
            edge: pulse.delta0,
            center: pulse.delta_min,
        },
    )?;
    PulseSchedule::new(vec![seg])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_a_segments() {
        let u = 1.8e9;
        let s = model_a_schedule(100.0 * u, u, PI).unwrap();
        assert_eq!(s.segments().len(), 3);
        assert!((s.segments()[1].duration() - PI / u).abs() < 1e-24);
        assert_eq!(s.segments()[0].duration(), PI / (100.0 * u));
        assert!(model_a_schedule(1e9, 0.0, PI).is_err());
        assert!(model_a_schedule(1e9, 1e8, 0.0).is_err());
        assert!(model_a_schedule(1e9, 1e8, 7.0).is_err());
    }

    #[test]
    fn model_b_duration() {
        let omega = 1e8;
        let s = model_b_schedule(omega, omega, 1.8e9).unwrap();
        assert!((s.total_duration() - 4.0 * PI / omega).abs() < 1e-20);
        let c = s.controls_at(0.5 * PI / omega);
        assert_eq!(c.omega, [omega, 0.0]);
        let c = s.controls_at(2.0 * PI / omega);
        assert_eq!(c.omega, [0.0, omega]);
        assert!(model_b_schedule(0.0, omega, 1.8e9).is_err());
    }

    #[test]
    fn adiabatic_envelope() {
        let p = AdiabaticPulse::REFERENCE;
        let s = adiabatic_schedule(&p, 3e-6).unwrap();
        assert_eq!(s.controls_at(0.0).omega, [0.0, 0.0]);
        let mid = s.controls_at(1.5e-6);
        assert!((mid.omega[0] - p.omega0).abs() < 1e-6);
        assert!((mid.delta[0] - p.delta_min).abs() < 1e-3);
        assert!(s.controls_at(3e-6).omega[0].abs() < 1e-6);
        assert!(s.segments()[0].is_symmetric());
        assert_eq!(s.segments()[0].omega()[0].max_abs(), p.omega0);
    }
}
