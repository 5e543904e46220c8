use std::cell::Cell;

use super::analysis::{analyze_gate, wrap_signed, GateReport};
use crate::internal_dynamics::{InternalModel, PulseSchedule};
use crate::{Error, Result};

/// Phase accuracy the calibration guarantees.
pub const PHASE_TOLERANCE: f64 = 1e-6;

const MAX_EVALUATIONS: usize = 100;

#[derive(Debug, Clone)]
pub struct Calibration {
    pub parameter: f64,
    pub schedule: PulseSchedule,
    pub report: GateReport,
    pub evaluations: usize,
}

/// Tunes one knob of a schedule family until the entanglement phase hits
/// `target`, using Brent's method on the phase error wrapped into (−π, π].
///
/// `family` maps the knob value to a schedule. The bracket must straddle the
/// target; otherwise a calibration error reports both endpoint phases.
pub fn calibrate<F>(
    family: F,
    model: &InternalModel,
    target: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<Calibration>
where
    F: Fn(f64) -> Result<PulseSchedule>,
{
    let evaluations = Cell::new(0usize);
    let mut best: Option<(f64, f64, PulseSchedule, GateReport)> = None;
    let mut objective = |x: f64| -> Result<f64> {
        let schedule = family(x)?;
        let report = analyze_gate(&schedule, model, tol)?;
        evaluations.set(evaluations.get() + 1);
        let g = wrap_signed(report.entanglement_phase - target);
        log::debug!(
            "calibration step {}: knob = {x:e}, phase error = {g:e}",
            evaluations.get()
        );
        if best.as_ref().map_or(true, |b| g.abs() < b.1.abs()) {
            best = Some((x, g, schedule, report));
        }
        Ok(g)
    };

    let (mut a, mut b) = bracket;
    let mut fa = objective(a)?;
    let mut fb = objective(b)?;
    if fa.abs() >= PHASE_TOLERANCE && fb.abs() >= PHASE_TOLERANCE && fa.signum() == fb.signum() {
        return Err(Error::Calibration(format!(
            "bracket [{a:e}, {b:e}] does not straddle the target {target}: phase errors {fa:e} and {fb:e}"
        )));
    }

    // Brent (1973), zero-in.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    while fb.abs() >= PHASE_TOLERANCE && fa.abs() >= PHASE_TOLERANCE {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs();
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 {
            break;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = objective(b)?;
        if evaluations.get() >= MAX_EVALUATIONS {
            break;
        }
    }

    let evaluations = evaluations.get();
    let (parameter, g, schedule, report) = best.expect("objective evaluated at least twice");
    if g.abs() >= PHASE_TOLERANCE {
        return Err(Error::Calibration(format!(
            "no convergence after {evaluations} evaluations: best knob {parameter:e} leaves phase error {g:e}"
        )));
    }
    Ok(Calibration {
        parameter,
        schedule,
        report,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate_protocols::model_a_with_wait;
    use std::f64::consts::PI;

    #[test]
    fn model_a_wait_calibration() {
        let u = 1.8e9;
        let model = InternalModel::new(u, 0.0).unwrap();
        let cal = calibrate(
            |w| model_a_with_wait(100.0 * u, w),
            &model,
            PI / 2.0,
            (0.2 * PI / u, PI / u),
            1e-10,
        )
        .unwrap();
        assert!(wrap_signed(cal.report.entanglement_phase - PI / 2.0).abs() < PHASE_TOLERANCE);
        // each π pulse spends on average 3/8 of its length π/Ω in |rr⟩
        let pulse_phase = 2.0 * 0.375 * u * PI / (100.0 * u);
        assert!(
            (cal.parameter * u + pulse_phase - PI / 2.0).abs() < 1e-3,
            "{}",
            cal.parameter * u
        );
        assert!(cal.evaluations < 30);
    }

    #[test]
    fn degenerate_bracket() {
        let u = 1.8e9;
        let model = InternalModel::new(u, 0.0).unwrap();
        let err = calibrate(
            |w| model_a_with_wait(100.0 * u, w),
            &model,
            PI,
            (0.1 / u, 0.5 / u),
            1e-9,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Calibration(_)));
    }
}
