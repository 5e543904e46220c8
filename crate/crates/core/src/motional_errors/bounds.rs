use std::f64::consts::PI;

use crate::atomic_structure::Constants;
use crate::{Error, Result};

/// Trap parameters for the ground and Rydberg states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    /// Ground-state trap angular frequency ω.
    pub omega: f64,
    /// Rydberg-state trap angular frequency ω′.
    pub omega_prime: f64,
    /// Atomic mass in kg.
    pub mass: f64,
    /// Mean thermal excitation number n̄.
    pub nbar: f64,
    /// Ground-state wavepacket width a in meters.
    pub width: f64,
}

impl TrapSpec {
    /// Width defaults to √(ħ/2mω), the single-atom ground-state spread.
    pub fn new(omega: f64, omega_prime: f64, mass: f64, nbar: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::domain(format!("mass must be > 0, got {mass}")));
        }
        let width = (Constants::CODATA_2018.hbar / (2.0 * mass * omega)).sqrt();
        Self {
            omega,
            omega_prime,
            mass,
            nbar,
            width,
        }
        .validated()
    }

    pub fn with_width(self, width: f64) -> Result<Self> {
        Self { width, ..self }.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::domain(format!(
                "trap frequency omega must be > 0, got {}",
                self.omega
            )));
        }
        if !(self.omega_prime >= 0.0 && self.omega_prime.is_finite()) {
            return Err(Error::domain(format!(
                "Rydberg trap frequency must be >= 0, got {}",
                self.omega_prime
            )));
        }
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(Error::domain(format!(
                "mean excitation number must be >= 0, got {}",
                self.nbar
            )));
        }
        if !(self.width >= 0.0 && self.width.is_finite()) {
            return Err(Error::domain(format!(
                "wavepacket width must be >= 0, got {}",
                self.width
            )));
        }
        Ok(self)
    }
}

/// A probability from a perturbative formula, clamped to 1 when the formula
/// leaves its regime of validity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded {
    pub value: f64,
    pub clamped: bool,
}

impl Bounded {
    fn clamp(raw: f64) -> Self {
        if raw > 1.0 {
            log::warn!("perturbative estimate {raw:e} exceeds 1; clamped");
            Self {
                value: 1.0,
                clamped: true,
            }
        } else {
            Self {
                value: raw,
                clamped: false,
            }
        }
    }
}

/// p_k < (3ηΩ₀²Δt/8u)²/2, the motional excitation from the dipole force.
pub fn kick_bound(eta: f64, omega0: f64, u: f64, duration: f64) -> Result<Bounded> {
    if u == 0.0 {
        return Err(Error::domain("kick bound is undefined for u = 0"));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::domain(format!("eta must lie in [0, 1), got {eta}")));
    }
    let x = 3.0 * eta * omega0 * omega0 * duration / (8.0 * u);
    Ok(Bounded::clamp(0.5 * x * x))
}

/// (2n̄ + 1) p_k.
pub fn thermal_kick(p_k: f64, nbar: f64) -> Bounded {
    Bounded::clamp((2.0 * nbar + 1.0) * p_k)
}

/// p_t < |ω² − ω′²| Δt²/128, the excitation from the trap-frequency mismatch.
pub fn trap_mismatch_bound(omega: f64, omega_prime: f64, duration: f64) -> Result<Bounded> {
    if !(duration > 0.0) {
        return Err(Error::domain(format!(
            "gate duration must be > 0, got {duration}"
        )));
    }
    Ok(Bounded::clamp(
        (omega * omega - omega_prime * omega_prime).abs() * duration * duration / 128.0,
    ))
}

/// (2n̄² + 2n̄ + 1) p_t, with n̄² the square of the mean.
pub fn thermal_trap(p_t: f64, nbar: f64) -> Bounded {
    Bounded::clamp((2.0 * nbar * nbar + 2.0 * nbar + 1.0) * p_t)
}

/// Heating Δn̄ = (ωΔt)²(2n̄ + 1)/4 from switching the trap off for Δt.
pub fn release_retrap(omega: f64, duration: f64, nbar: f64) -> Result<f64> {
    if duration < 0.0 {
        return Err(Error::domain(format!(
            "release time must be >= 0, got {duration}"
        )));
    }
    let x = omega * duration;
    Ok(x * x * (2.0 * nbar + 1.0) / 4.0)
}

/// Momentum transferred by the dipole force during a model A gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickDiagnostics {
    /// 3φ/R, in ħ per meter.
    pub momentum_kick: f64,
    /// Kick in units of the photon recoil 2π/λ.
    pub recoil_ratio: f64,
    /// 2πa/λ.
    pub lamb_dicke: f64,
}

pub fn model_a_kick(
    phi: f64,
    separation: f64,
    wavelength: f64,
    width: f64,
) -> Result<KickDiagnostics> {
    if !(separation > 0.0 && wavelength > 0.0 && width > 0.0) {
        return Err(Error::domain(
            "separation, wavelength and width must be > 0",
        ));
    }
    let momentum_kick = 3.0 * phi / separation;
    let k = 2.0 * PI / wavelength;
    Ok(KickDiagnostics {
        momentum_kick,
        recoil_ratio: momentum_kick / k,
        lamb_dicke: k * width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kick_bound_reference_value() {
        let p = kick_bound(1.0 / 30.0, 1e8, 1.8e9, 1e-6).unwrap();
        assert!((p.value - 2.41e-3).abs() < 0.005e-3, "{}", p.value);
        assert!(!p.clamped);
        assert_eq!(kick_bound(0.0, 1e8, 1.8e9, 1e-6).unwrap().value, 0.0);
        let p2 = kick_bound(1.0 / 30.0, 1e8, 1.8e9, 2e-6).unwrap();
        assert!((p2.value / p.value - 4.0).abs() < 1e-12);
        assert!(kick_bound(0.1, 1e8, 0.0, 1e-6).is_err());
    }

    #[test]
    fn clamping() {
        let p = kick_bound(0.5, 1e9, 1e8, 1e-5).unwrap();
        assert_eq!(
            p,
            Bounded {
                value: 1.0,
                clamped: true
            }
        );
        assert!(thermal_kick(0.4, 1.0).clamped);
    }

    #[test]
    fn trap_bound_is_even() {
        let a = trap_mismatch_bound(1e6, 5e5, 1e-6).unwrap().value;
        let b = trap_mismatch_bound(5e5, 1e6, 1e-6).unwrap().value;
        assert_eq!(a, b);
        assert!((a - 5.859375e-3).abs() < 1e-15);
        assert_eq!(trap_mismatch_bound(1e6, 1e6, 1e-6).unwrap().value, 0.0);
    }

    #[test]
    fn thermal_factors() {
        assert_eq!(thermal_kick(1e-4, 0.0).value, 1e-4);
        assert!((thermal_kick(1e-4, 2.0).value - 5e-4).abs() < 1e-18);
        assert_eq!(thermal_trap(1e-4, 0.0).value, 1e-4);
        assert!((thermal_trap(1e-4, 1.0).value - 5e-4).abs() < 1e-18);
    }

    #[test]
    fn release_retrap_heating() {
        assert_eq!(release_retrap(1e6, 0.0, 3.0).unwrap(), 0.0);
        assert!((release_retrap(1e5, 1e-6, 0.0).unwrap() - 2.5e-3).abs() < 1e-15);
        let r = release_retrap(1e6, 1e-6, 1.5).unwrap() / release_retrap(1e6, 1e-6, 0.0).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn model_a_recoil() {
        let d = model_a_kick(PI, 1e-6, 1e-6, 1e-8).unwrap();
        assert!((d.recoil_ratio - 1.5).abs() < 1e-12);
        assert_eq!(
            model_a_kick(0.0, 1e-6, 1e-6, 1e-8).unwrap().momentum_kick,
            0.0
        );
        assert!((d.lamb_dicke - 2.0 * PI * 1e-2).abs() < 1e-12);
    }

    #[test]
    fn trap_spec_validation() {
        let t = TrapSpec::new(1e6, 5e5, 1.4e-25, 0.0).unwrap();
        assert!(t.width > 1e-9 && t.width < 1e-7);
        assert!(TrapSpec::new(0.0, 5e5, 1.4e-25, 0.0).is_err());
        assert!(TrapSpec::new(1e6, 5e5, 1.4e-25, -1.0).is_err());
    }
}
