//! Motional imperfections of the gate: perturbative bounds with thermal
//! scaling, release-retrap heating, the model A momentum kick, and joint
//! internal/oscillator simulations that serve as numeric checks of the bounds.

mod bounds;
mod joint;

use std::fmt;
use std::io::{self, Write};

pub use bounds::{
    kick_bound, model_a_kick, release_retrap, thermal_kick, thermal_trap, trap_mismatch_bound,
    Bounded, KickDiagnostics, TrapSpec,
};
pub use joint::{
    simulate_joint_kick, simulate_trap_mismatch, JointOptions, JointOutcome, CONVERGENCE_LIMIT,
    DEFAULT_CUTOFF, MIN_CUTOFF,
};

use crate::Result;

/// Gate parameters entering the analytic budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    pub eta: f64,
    pub omega0: f64,
    pub u: f64,
    pub duration: f64,
    pub trap: TrapSpec,
    /// Entanglement phase, for the model A kick diagnostic.
    pub phi: f64,
    /// Separation R in meters.
    pub separation: f64,
    /// Laser wavelength in meters.
    pub wavelength: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionalBudget {
    pub p_k: Bounded,
    pub p_k_thermal: Bounded,
    pub p_t: Bounded,
    pub p_t_thermal: Bounded,
    /// Release-retrap heating over the gate duration.
    pub delta_nbar: f64,
    pub kick: KickDiagnostics,
    /// Numeric values from the joint simulations, when they were run.
    pub p_k_numeric: Option<f64>,
    pub p_t_numeric: Option<f64>,
}

impl MotionalBudget {
    pub fn evaluate(inputs: &BudgetInputs) -> Result<Self> {
        let nbar = inputs.trap.nbar;
        let p_k = kick_bound(inputs.eta, inputs.omega0, inputs.u, inputs.duration)?;
        let p_t = trap_mismatch_bound(inputs.trap.omega, inputs.trap.omega_prime, inputs.duration)?;
        Ok(Self {
            p_k,
            p_k_thermal: thermal_kick(p_k.value, nbar),
            p_t,
            p_t_thermal: thermal_trap(p_t.value, nbar),
            delta_nbar: release_retrap(inputs.trap.omega, inputs.duration, nbar)?,
            kick: model_a_kick(
                inputs.phi,
                inputs.separation,
                inputs.wavelength,
                inputs.trap.width,
            )?,
            p_k_numeric: None,
            p_t_numeric: None,
        })
    }

    fn rows(&self) -> Vec<(&'static str, String)> {
        let mut rows = vec![
            ("p_k", format!("{:.12e}", self.p_k.value)),
            ("p_k_clamped", self.p_k.clamped.to_string()),
            ("p_k_thermal", format!("{:.12e}", self.p_k_thermal.value)),
            ("p_k_thermal_clamped", self.p_k_thermal.clamped.to_string()),
            ("p_t", format!("{:.12e}", self.p_t.value)),
            ("p_t_clamped", self.p_t.clamped.to_string()),
            ("p_t_thermal", format!("{:.12e}", self.p_t_thermal.value)),
            ("p_t_thermal_clamped", self.p_t_thermal.clamped.to_string()),
            ("delta_nbar", format!("{:.12e}", self.delta_nbar)),
            ("momentum_kick", format!("{:.12e}", self.kick.momentum_kick)),
            ("recoil_ratio", format!("{:.12e}", self.kick.recoil_ratio)),
            ("lamb_dicke", format!("{:.12e}", self.kick.lamb_dicke)),
        ];
        if let Some(p) = self.p_k_numeric {
            rows.push(("p_k_numeric", format!("{p:.12e}")));
        }
        if let Some(p) = self.p_t_numeric {
            rows.push(("p_t_numeric", format!("{p:.12e}")));
        }
        rows
    }

    /// One-row CSV with a header, same keys as the text record.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let rows = self.rows();
        let header: Vec<&str> = rows.iter().map(|r| r.0).collect();
        let values: Vec<&str> = rows.iter().map(|r| r.1.as_str()).collect();
        writeln!(w, "{}", header.join(","))?;
        writeln!(w, "{}", values.join(","))
    }
}

impl fmt::Display for MotionalBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.rows() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_record() {
        let trap = TrapSpec::new(1e6, 5e5, 1.443e-25, 0.5).unwrap();
        let inputs = BudgetInputs {
            eta: 1.0 / 30.0,
            omega0: 1e8,
            u: 1.8e9,
            duration: 1e-6,
            trap,
            phi: std::f64::consts::PI,
            separation: 1e-6,
            wavelength: 1e-6,
        };
        let mut b = MotionalBudget::evaluate(&inputs).unwrap();
        assert!((b.p_k_thermal.value / b.p_k.value - 2.0).abs() < 1e-12);
        assert!((b.p_t_thermal.value / b.p_t.value - 2.5).abs() < 1e-12);
        b.p_k_numeric = Some(1e-7);
        let text = b.to_string();
        assert!(text.contains("p_k_numeric = 1.0"));
        let mut csv = Vec::new();
        b.write_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    }
}
