//! Closed-form Stark structure and dipole-dipole interaction of Rydberg states.
//!
//! Energies are returned as angular frequencies (E/ħ, rad/s). Dipole moments are
//! returned in units of e·a₀ along the field (z) axis.

use std::f64::consts::PI;

use crate::{Error, Result};

/// CODATA 2018 values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Elementary charge (C).
    pub e: f64,
    /// Bohr radius (m).
    pub a0: f64,
    /// Vacuum permittivity (F/m).
    pub eps0: f64,
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
}

impl Constants {
    pub const CODATA_2018: Constants = Constants {
        e: 1.602_176_634e-19,
        a0: 5.291_772_109_03e-11,
        eps0: 8.854_187_812_8e-12,
        hbar: 1.054_571_817e-34,
    };

    /// Rydberg energy e²/(8πε₀a₀) in joules.
    pub fn rydberg_energy(&self) -> f64 {
        self.e * self.e / (8.0 * PI * self.eps0 * self.a0)
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// External conditions shared by every closed-form evaluation.
///
/// All frequencies handled by this crate are angular (rad/s). Inputs quoted as
/// "MHz" or "GHz" are converted with [`PhysicalContext::frequency`], which
/// multiplies by 2π only when `angular` is false.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalContext {
    electric_field: f64,
    constants: Constants,
    angular: bool,
}

impl PhysicalContext {
    pub fn new(electric_field: f64) -> Result<Self> {
        Self::with_constants(electric_field, Constants::CODATA_2018)
    }

    pub fn with_constants(electric_field: f64, constants: Constants) -> Result<Self> {
        if !(electric_field >= 0.0 && electric_field.is_finite()) {
            return Err(Error::domain(format!(
                "electric field must be finite and >= 0 V/m, got {electric_field}"
            )));
        }
        let c = constants;
        if [c.e, c.a0, c.eps0, c.hbar]
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::domain("physical constants must be positive"));
        }
        Ok(Self {
            electric_field,
            constants,
            angular: true,
        })
    }

    /// Treat quoted frequencies as cyclic (Hz) rather than angular.
    pub fn with_cyclic_inputs(mut self) -> Self {
        self.angular = false;
        self
    }

    pub fn electric_field(&self) -> f64 {
        self.electric_field
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn is_angular(&self) -> bool {
        self.angular
    }

    /// Converts a quoted frequency in Hz to rad/s under this context's convention.
    pub fn frequency(&self, quoted_hz: f64) -> f64 {
        if self.angular {
            quoted_hz
        } else {
            2.0 * PI * quoted_hz
        }
    }
}

/// A hydrogenic Stark eigenstate |n, q, m⟩, optionally with a quantum defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkState {
    n: u32,
    q: i32,
    m: i32,
    quantum_defect: f64,
}

impl StarkState {
    pub fn new(n: u32, q: i32, m: i32, quantum_defect: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("principal quantum number n must be >= 1"));
        }
        let n_i = n as i64;
        let (q_i, m_i) = (q as i64, m as i64);
        if m_i.abs() > n_i - 1 {
            return Err(Error::domain(format!(
                "|m| <= n - 1 violated: n = {n}, m = {m}"
            )));
        }
        let q_max = n_i - 1 - m_i.abs();
        if q_i.abs() > q_max {
            return Err(Error::domain(format!(
                "|q| <= n - 1 - |m| violated: n = {n}, q = {q}, m = {m}"
            )));
        }
        if (q_max - q_i) % 2 != 0 {
            return Err(Error::domain(format!(
                "q must differ from n - 1 - |m| by an even number: n = {n}, q = {q}, m = {m}"
            )));
        }
        if !(quantum_defect >= 0.0 && quantum_defect.is_finite()) {
            return Err(Error::domain(format!(
                "quantum defect must be >= 0, got {quantum_defect}"
            )));
        }
        if (n as f64) - quantum_defect <= 0.0 {
            return Err(Error::domain(format!(
                "effective quantum number n - defect must be > 0 (n = {n}, defect = {quantum_defect})"
            )));
        }
        Ok(Self {
            n,
            q,
            m,
            quantum_defect,
        })
    }

    pub fn hydrogen(n: u32, q: i32, m: i32) -> Result<Self> {
        Self::new(n, q, m, 0.0)
    }

    /// The extremal state |n, n−1, 0⟩ with the largest dipole moment.
    pub fn extremal(n: u32) -> Result<Self> {
        Self::hydrogen(n, n as i32 - 1, 0)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> i32 {
        self.q
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn quantum_defect(&self) -> f64 {
        self.quantum_defect
    }

    /// ν = n − quantum defect.
    pub fn effective_n(&self) -> f64 {
        self.n as f64 - self.quantum_defect
    }
}

/// A length tagged with its unit at the API boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Meters(f64),
    BohrRadii(f64),
}

impl Length {
    pub fn meters(&self, constants: &Constants) -> f64 {
        match *self {
            Length::Meters(v) => v,
            Length::BohrRadii(v) => v * constants.a0,
        }
    }
}

/// Two atoms on the field axis: separation R and ground-state wavepacket width a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionGeometry {
    separation: f64,
    width: f64,
}

impl InteractionGeometry {
    pub fn new(separation: Length, width: Length, constants: &Constants) -> Result<Self> {
        let r = separation.meters(constants);
        let a = width.meters(constants);
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Singularity(format!(
                "separation must be > 0, got {r} m"
            )));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::domain(format!(
                "wavepacket width must be >= 0, got {a} m"
            )));
        }
        if a / r >= 1.0 {
            return Err(Error::domain(format!(
                "eta = a/R must be < 1, got {}",
                a / r
            )));
        }
        Ok(Self {
            separation: r,
            width: a,
        })
    }

    /// Geometry specified by separation and η = a/R directly.
    pub fn from_eta(separation: Length, eta: f64, constants: &Constants) -> Result<Self> {
        let r = separation.meters(constants);
        Self::new(Length::Meters(r), Length::Meters(eta * r), constants)
    }

    /// Separation R in meters.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Width a in meters.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn eta(&self) -> f64 {
        self.width / self.separation
    }
}

/// Linear Stark shift ΔE = 3νq e a₀ E / 2, as an angular frequency.
pub fn stark_shift(state: &StarkState, ctx: &PhysicalContext) -> f64 {
    let c = ctx.constants();
    1.5 * state.effective_n() * state.q() as f64 * c.e * c.a0 * ctx.electric_field() / c.hbar
}

/// [`stark_shift`] with a caller-supplied field limit beyond which n-mixing is
/// no longer negligible. Exceeding it only logs a warning.
pub fn stark_shift_checked(state: &StarkState, ctx: &PhysicalContext, field_limit: f64) -> f64 {
    if ctx.electric_field() > field_limit {
        log::warn!(
            "field {:.3e} V/m exceeds the supplied n-mixing limit {:.3e} V/m for n = {}",
            ctx.electric_field(),
            field_limit,
            state.n()
        );
    }
    stark_shift(state, ctx)
}

/// Permanent dipole moment μ_z = 3νq/2 in units of e·a₀.
pub fn dipole_moment(state: &StarkState) -> f64 {
    1.5 * state.effective_n() * state.q() as f64
}

/// Diagonal dipole-dipole energy u(R) for two atoms separated along z:
/// u = −2 μ₁μ₂ / (4πε₀ R³ ħ).
pub fn dipole_dipole_energy(
    s1: &StarkState,
    s2: &StarkState,
    geom: &InteractionGeometry,
    ctx: &PhysicalContext,
) -> f64 {
    let c = ctx.constants();
    let mu1 = dipole_moment(s1) * c.e * c.a0;
    let mu2 = dipole_moment(s2) * c.e * c.a0;
    let r = geom.separation();
    -2.0 * mu1 * mu2 / (4.0 * PI * c.eps0 * r.powi(3) * c.hbar)
}

/// Closed form u(R) = −9[ν(ν−1)]² (a₀/R)³ Ry/ħ for two atoms in |n, n−1, 0⟩.
pub fn extremal_pair_energy(
    effective_n: f64,
    separation: f64,
    ctx: &PhysicalContext,
) -> Result<f64> {
    if !(separation > 0.0) {
        return Err(Error::Singularity(format!(
            "separation must be > 0, got {separation}"
        )));
    }
    let c = ctx.constants();
    let nn = effective_n * (effective_n - 1.0);
    Ok(-9.0 * nn * nn * (c.a0 / separation).powi(3) * c.rydberg_energy() / c.hbar)
}

/// Linearised force F = 3u/R (angular frequency per meter).
pub fn dipole_force(u: f64, separation: f64) -> Result<f64> {
    if separation == 0.0 {
        return Err(Error::Singularity("force evaluated at R = 0".into()));
    }
    Ok(3.0 * u / separation)
}
