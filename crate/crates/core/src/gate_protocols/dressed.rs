use std::io::{self, Write};

use crate::internal_dynamics::{PulseSchedule, PulseSegment};
use crate::{Error, Result};

/// Light-shifted energies of the dressed levels connected to |gg⟩ and |eg⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedEnergies {
    pub gg: f64,
    pub eg: f64,
    /// δ̃ = δ − Ω²/(4δ + 2u), the detuning shifted by eliminating |rr⟩.
    pub delta_tilde: f64,
}

impl DressedEnergies {
    /// Integrand of the entanglement phase, ε_gg − 2ε_eg.
    pub fn phase_rate(&self) -> f64 {
        self.gg - 2.0 * self.eg
    }
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// ε_gg = sgn(δ̃)(|δ̃| − √(δ̃² + 2Ω²))/2 and ε_eg = sgn(δ)(|δ| − √(δ² + Ω²))/2,
/// with sgn(0) = +1.
pub fn dressed_energies(omega: f64, delta: f64, u: f64) -> Result<DressedEnergies> {
    let denom = 4.0 * delta + 2.0 * u;
    if denom == 0.0 {
        return Err(Error::domain(format!(
            "dressed energies have a pole at 4*delta + 2u = 0 (delta = {delta:e}, u = {u:e})"
        )));
    }
    let om2 = omega * omega;
    let dt = delta - om2 / denom;
    // (|x| - sqrt(x² + a)) / 2 written without cancellation
    let shift = |x: f64, a: f64| {
        if a == 0.0 {
            0.0
        } else {
            -0.5 * a / (x.abs() + (x * x + a).sqrt())
        }
    };
    Ok(DressedEnergies {
        gg: sgn(dt) * shift(dt, 2.0 * om2),
        eg: sgn(delta) * shift(delta, om2),
        delta_tilde: dt,
    })
}

/// Dressed-state energies and accumulated entanglement phase on a time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DressedCurves {
    pub t: Vec<f64>,
    pub omega: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_tilde: Vec<f64>,
    pub eps_gg: Vec<f64>,
    pub eps_eg: Vec<f64>,
    /// φ(t) = ∫₀ᵗ (ε_gg − 2ε_eg) dt', not wrapped.
    pub phi: Vec<f64>,
}

impl DressedCurves {
    pub fn final_phase(&self) -> f64 {
        self.phi.last().copied().unwrap_or(0.0)
    }

    fn push(&mut self, t: f64, omega: f64, delta: f64, e: &DressedEnergies, phi: f64) {
        self.t.push(t);
        self.omega.push(omega);
        self.delta.push(delta);
        self.delta_tilde.push(e.delta_tilde);
        self.eps_gg.push(e.gg);
        self.eps_eg.push(e.eg);
        self.phi.push(phi);
    }

    /// Columns `t,omega,delta,delta_tilde,eps_gg,eps_eg,phi` (SI, rad/s, rad).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,omega,delta,delta_tilde,eps_gg,eps_eg,phi")?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                self.t[i],
                self.omega[i],
                self.delta[i],
                self.delta_tilde[i],
                self.eps_gg[i],
                self.eps_eg[i],
                self.phi[i]
            )?;
        }
        Ok(())
    }
}

const PHASE_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 40;
const INITIAL_PIECES: usize = 64;

#[derive(Clone, Copy)]
struct Node {
    s: f64,
    f: f64,
    energies: DressedEnergies,
}

struct SegmentIntegrator<'a> {
    seg: &'a PulseSegment,
    start: f64,
    u: f64,
}

impl SegmentIntegrator<'_> {
    fn eval(&self, s: f64) -> Result<Node> {
        let c = self.seg.controls(s);
        let energies = dressed_energies(c.omega[0], c.delta[0], self.u).map_err(|e| match e {
            Error::Domain(msg) => Error::Domain(format!("{msg} at t = {:e} s", self.start + s)),
            other => other,
        })?;
        Ok(Node {
            s,
            f: energies.phase_rate(),
            energies,
        })
    }

    /// Adaptive Simpson on [a, b]; accepted nodes are appended to `out` in order
    /// together with the integral over the piece that ends at them.
    fn refine(
        &self,
        a: &Node,
        m: &Node,
        b: &Node,
        whole: f64,
        tol: f64,
        depth: u32,
        out: &mut Vec<(Node, f64)>,
    ) -> Result<()> {
        let lm = self.eval(0.5 * (a.s + m.s))?;
        let rm = self.eval(0.5 * (m.s + b.s))?;
        let h = b.s - a.s;
        let left = h / 12.0 * (a.f + 4.0 * lm.f + m.f);
        let right = h / 12.0 * (m.f + 4.0 * rm.f + b.f);
        let diff = left + right - whole;
        if depth >= MAX_DEPTH || diff.abs() <= 15.0 * tol {
            let corr = diff / 30.0;
            out.push((*m, left + corr));
            out.push((*b, right + corr));
            return Ok(());
        }
        self.refine(a, &lm, m, left, 0.5 * tol, depth + 1, out)?;
        self.refine(m, &rm, b, right, 0.5 * tol, depth + 1, out)
    }
}

/// Integrates φ(t) = ∫ (ε_gg − 2ε_eg) dt' across a schedule whose segments drive
/// both atoms identically. The stored grid is the adaptive Simpson grid.
pub fn entanglement_phase_integral(schedule: &PulseSchedule, u: f64) -> Result<DressedCurves> {
    if let Some(k) = schedule.segments().iter().position(|s| !s.is_symmetric()) {
        return Err(Error::domain(format!(
            "segment {k} drives the atoms differently; dressed analysis needs identical controls"
        )));
    }
    let mut curves = DressedCurves::default();
    let mut phi = 0.0;
    let tol_per_piece = PHASE_TOL / (schedule.segments().len() * INITIAL_PIECES) as f64;
    for (seg, &start) in schedule.segments().iter().zip(schedule.starts()) {
        let integ = SegmentIntegrator { seg, start, u };
        let d = seg.duration();
        let first = integ.eval(0.0)?;
        if curves.t.is_empty() {
            let c = seg.controls(0.0);
            curves.push(start, c.omega[0], c.delta[0], &first.energies, 0.0);
        }
        let mut nodes = vec![first];
        for k in 1..=INITIAL_PIECES {
            nodes.push(integ.eval(d * k as f64 / INITIAL_PIECES as f64)?);
        }
        for pair in nodes.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let m = integ.eval(0.5 * (a.s + b.s))?;
            let whole = (b.s - a.s) / 6.0 * (a.f + 4.0 * m.f + b.f);
            let mut out = Vec::new();
            integ.refine(a, &m, b, whole, tol_per_piece, 0, &mut out)?;
            for (node, piece) in out {
                phi += piece;
                let c = seg.controls(node.s);
                curves.push(start + node.s, c.omega[0], c.delta[0], &node.energies, phi);
            }
        }
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate_protocols::{adiabatic_schedule, AdiabaticPulse};
    use crate::internal_dynamics::Envelope;

    #[test]
    fn zero_drive_gives_zero() {
        let e = dressed_energies(0.0, 3.0, 5.0).unwrap();
        assert_eq!((e.gg, e.eg), (0.0, 0.0));
        let e = dressed_energies(0.0, 0.0, 5.0).unwrap();
        assert_eq!((e.gg, e.eg), (0.0, 0.0));
    }

    #[test]
    fn far_detuned_light_shift() {
        let omega = 1.0;
        let delta = 1e3;
        let e = dressed_energies(omega, delta, 0.0).unwrap();
        let asym = -omega * omega / (4.0 * delta);
        assert!(((e.eg - asym) / asym).abs() < 1e-3);
    }

    #[test]
    fn pole_is_reported() {
        let err = dressed_energies(1.0, -2.0, 4.0).unwrap_err();
        assert!(matches!(err, Error::Domain(m) if m.contains("pole")));
    }

    #[test]
    fn sign_of_zero_detuning_is_positive() {
        let e = dressed_energies(2.0, 0.0, 1e9).unwrap();
        assert!((e.eg - -1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_controls_integrate_exactly() {
        let (omega, delta, u, t) = (1e8, 3e8, 1.8e9, 2e-7);
        let seg = PulseSegment::symmetric(t, Envelope::Constant(omega), Envelope::Constant(delta))
            .unwrap();
        let curves =
            entanglement_phase_integral(&PulseSchedule::new(vec![seg]).unwrap(), u).unwrap();
        let rate = dressed_energies(omega, delta, u).unwrap().phase_rate();
        assert!((curves.final_phase() - rate * t).abs() < 1e-9 * (rate * t).abs());
        assert_eq!(curves.phi[0], 0.0);
        assert!(curves.t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn undriven_schedule_accumulates_nothing() {
        let seg = PulseSegment::idle(1e-6).unwrap();
        let curves =
            entanglement_phase_integral(&PulseSchedule::new(vec![seg]).unwrap(), 1.8e9).unwrap();
        assert!(curves.phi.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn asymmetric_drive_rejected() {
        let seg = PulseSegment::rectangular(1e-6, 1e8, 0.0).unwrap();
        assert!(
            entanglement_phase_integral(&PulseSchedule::new(vec![seg]).unwrap(), 1.8e9).is_err()
        );
    }

    #[test]
    fn phase_is_time_extensive() {
        let p = AdiabaticPulse::REFERENCE;
        let u = 1.8e9;
        let a = entanglement_phase_integral(&adiabatic_schedule(&p, 2e-6).unwrap(), u)
            .unwrap()
            .final_phase();
        let b = entanglement_phase_integral(&adiabatic_schedule(&p, 4e-6).unwrap(), u)
            .unwrap()
            .final_phase();
        assert!((b / a - 2.0).abs() < 1e-9);
    }
}
