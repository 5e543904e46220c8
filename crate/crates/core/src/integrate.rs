//! Adaptive Dormand–Prince 8(5,3) integration of complex linear ODE systems.
//!
//! The driver integrates `dy/dt = f(t, y)` over `[t0, t1]`, landing exactly on a
//! sorted list of stop times where the caller gets a callback. Step control
//! follows Hairer's DOP853 with the mixed 5th/3rd order error estimate.

use num_complex::Complex64 as C64;

use crate::dop853_tableau::{A, B, C, E3, E5, STAGES};
use crate::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
// Step control runs this much tighter than the requested tolerance so that
// the accumulated (global) error, not just the per-step error, stays within it.
const INTERNAL_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Tolerance {
    /// Global target `tol`: per-step relative tolerance `tol * INTERNAL_MARGIN`,
    /// absolute a further factor 100 below.
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol >= 1e-13 && tol < 1e-3) {
            return Err(Error::domain(format!(
                "tolerance must lie in [1e-13, 1e-3), got {tol:e}"
            )));
        }
        Ok(Self {
            rtol: tol * INTERNAL_MARGIN,
            atol: tol * INTERNAL_MARGIN * 1e-2,
            max_steps: 50_000_000,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Reusable stage storage for one system size.
pub struct Dop853 {
    k: Vec<Vec<C64>>,
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    stats: Stats,
}

impl Dop853 {
    pub fn new(dim: usize) -> Self {
        Self {
            k: vec![vec![C64::default(); dim]; STAGES + 1],
            y_stage: vec![C64::default(); dim],
            y_new: vec![C64::default(); dim],
            stats: Stats::default(),
        }
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Integrates `y` in place from `t0` to `t1`. `stops` must be sorted and lie in
    /// `(t0, t1]`; `on_stop` is called at each of them with the current state.
    pub fn integrate<F, S>(
        &mut self,
        mut rhs: F,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        tol: &Tolerance,
        stops: &[f64],
        mut on_stop: S,
    ) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
        S: FnMut(f64, &[C64]),
    {
        let dim = y.len();
        assert_eq!(dim, self.y_new.len(), "state dimension mismatch");
        if t1 <= t0 {
            return Ok(());
        }
        let mut t = t0;
        rhs(t, y, &mut self.k[0]);
        self.stats.evaluations += 1;
        let mut h = self.initial_step(&mut rhs, t, t1, y, tol);
        let mut stop_idx = 0;
        while stop_idx < stops.len() && stops[stop_idx] <= t0 {
            stop_idx += 1;
        }

        let mut steps = 0usize;
        while t < t1 {
            let target = if stop_idx < stops.len() {
                stops[stop_idx].min(t1)
            } else {
                t1
            };
            let mut h_try = h.min(target - t);
            let lands = h_try >= target - t;
            if lands {
                h_try = target - t;
            }
            let min_step = 10.0 * f64::EPSILON * t.abs().max(t1.abs());
            if h_try < min_step && !lands {
                return Err(Error::Integration {
                    time: t,
                    reason: "step size underflow".into(),
                });
            }

            let err = self.step(&mut rhs, t, y, h_try, tol);
            if !err.is_finite() {
                return Err(Error::Integration {
                    time: t,
                    reason: "non-finite state".into(),
                });
            }
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::Integration {
                    time: t,
                    reason: "step budget exhausted".into(),
                });
            }

            if err <= 1.0 {
                self.stats.accepted += 1;
                t = if lands { target } else { t + h_try };
                y.copy_from_slice(&self.y_new);
                // FSAL: stage 12 holds f(t + h, y_new).
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[STAGES - 1]);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                let proposal = h_try * factor;
                // a step shortened to land on a stop says little about the natural step size
                h = if lands && h_try < h {
                    h.max(proposal)
                } else {
                    proposal
                };
                if lands && stop_idx < stops.len() && target == stops[stop_idx].min(t1) {
                    while stop_idx < stops.len() && stops[stop_idx] <= t {
                        on_stop(t, y);
                        stop_idx += 1;
                    }
                }
            } else {
                self.stats.rejected += 1;
                h = h_try * (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, 1.0);
                if h < min_step {
                    return Err(Error::Integration {
                        time: t,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
        Ok(())
    }

    fn step<F>(&mut self, rhs: &mut F, t: f64, y: &[C64], h: f64, tol: &Tolerance) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let dim = y.len();
        for s in 1..STAGES {
            for i in 0..dim {
                let mut acc = C64::default();
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                self.y_stage[i] = y[i] + acc * h;
            }
            rhs(t + C[s] * h, &self.y_stage, &mut self.k[s]);
        }
        for i in 0..dim {
            let mut acc = C64::default();
            for (j, b) in B.iter().enumerate() {
                if *b != 0.0 {
                    acc += self.k[j][i] * *b;
                }
            }
            self.y_new[i] = y[i] + acc * h;
        }
        rhs(t + h, &self.y_new, &mut self.k[STAGES]);
        self.stats.evaluations += STAGES;

        let mut e5 = 0.0;
        let mut e3 = 0.0;
        for i in 0..dim {
            let mut a3 = C64::default();
            let mut a5 = C64::default();
            for j in 0..=STAGES {
                if E3[j] != 0.0 {
                    a3 += self.k[j][i] * E3[j];
                }
                if E5[j] != 0.0 {
                    a5 += self.k[j][i] * E5[j];
                }
            }
            let scale = tol.atol + y[i].norm().max(self.y_new[i].norm()) * tol.rtol;
            e3 += (a3.norm() / scale).powi(2);
            e5 += (a5.norm() / scale).powi(2);
        }
        if e5 == 0.0 && e3 == 0.0 {
            return 0.0;
        }
        let denom = e5 + 0.01 * e3;
        h.abs() * e5 / (denom * dim as f64).sqrt()
    }

    fn initial_step<F>(&mut self, rhs: &mut F, t: f64, t1: f64, y: &[C64], tol: &Tolerance) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let dim = y.len() as f64;
        let scale = |v: &C64| tol.atol + v.norm() * tol.rtol;
        let d0 = (y.iter().map(|v| (v.norm() / scale(v)).powi(2)).sum::<f64>() / dim).sqrt();
        let d1 = (y
            .iter()
            .zip(&self.k[0])
            .map(|(v, f)| (f.norm() / scale(v)).powi(2))
            .sum::<f64>()
            / dim)
            .sqrt();
        let span = t1 - t;
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        for i in 0..y.len() {
            self.y_stage[i] = y[i] + self.k[0][i] * h0;
        }
        rhs(t + h0, &self.y_stage, &mut self.k[1]);
        self.stats.evaluations += 1;
        let d2 = (y
            .iter()
            .zip(self.k[0].iter().zip(&self.k[1]))
            .map(|(v, (f0, f1))| ((f1 - f0).norm() / scale(v)).powi(2))
            .sum::<f64>()
            / dim)
            .sqrt()
            / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (1e-6f64).max(h0 * 1e-3)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_phase() {
        // dy/dt = -i w y
        let w = 3.7e9;
        let t1 = 2e-7;
        let mut y = vec![C64::new(1.0, 0.0)];
        let tol = Tolerance::new(1e-11).unwrap();
        let mut solver = Dop853::new(1);
        solver
            .integrate(
                |_, y, dy| dy[0] = C64::new(0.0, -w) * y[0],
                0.0,
                t1,
                &mut y,
                &tol,
                &[],
                |_, _| {},
            )
            .unwrap();
        let exact = C64::from_polar(1.0, -w * t1);
        assert!((y[0] - exact).norm() < 1e-8, "{}", (y[0] - exact).norm());
    }

    #[test]
    fn stops_are_hit_exactly() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let tol = Tolerance::new(1e-9).unwrap();
        let stops = [0.1, 0.25, 0.25, 0.7];
        let mut seen = Vec::new();
        Dop853::new(1)
            .integrate(
                |_, y, dy| dy[0] = -y[0],
                0.0,
                1.0,
                &mut y,
                &tol,
                &stops,
                |t, y| seen.push((t, y[0].re)),
            )
            .unwrap();
        let ts: Vec<f64> = seen.iter().map(|s| s.0).collect();
        assert_eq!(ts, vec![0.1, 0.25, 0.25, 0.7]);
        for (t, v) in seen {
            assert!((v - (-t).exp()).abs() < 1e-9);
        }
        assert!((y[0].re - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn underflow_reports_time() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let tol = Tolerance::new(1e-12).unwrap();
        // finite-time blow-up at t = 1
        let err = Dop853::new(1)
            .integrate(
                |_, y, dy| dy[0] = y[0] * y[0],
                0.0,
                2.0,
                &mut y,
                &tol,
                &[],
                |_, _| {},
            )
            .unwrap_err();
        match err {
            Error::Integration { time, .. } => assert!(time > 0.9 && time < 1.0 + 1e-9, "{time}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tolerance_range() {
        assert!(Tolerance::new(1e-15).is_err());
        assert!(Tolerance::new(1e-2).is_err());
        assert!(Tolerance::new(1e-9).is_ok());
    }
}
