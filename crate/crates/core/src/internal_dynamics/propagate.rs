use std::io::{self, Write};

use num_complex::Complex64 as C64;

use super::{apply_hamiltonian, InternalModel, PulseSchedule, TwoAtomState, DIM};
use crate::integrate::{Dop853, Tolerance};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateOptions {
    /// Target accuracy of the integrator, in [1e-13, 1e-3).
    pub tol: f64,
    /// Extra sample times; segment boundaries are always sampled.
    pub sample_times: Vec<f64>,
}

impl PropagateOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            sample_times: Vec::new(),
        }
    }

    /// `count` evenly spaced samples over `[0, duration]` in addition to the boundaries.
    pub fn with_uniform_samples(mut self, duration: f64, count: usize) -> Self {
        if count >= 2 {
            self.sample_times = (0..count)
                .map(|k| duration * k as f64 / (count - 1) as f64)
                .collect();
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: TwoAtomState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: TwoAtomState,
}

/// Solves i dψ/dt = H(t)ψ across the schedule. Each segment is integrated
/// separately so envelope discontinuities fall on step boundaries.
pub fn propagate(
    initial: &TwoAtomState,
    schedule: &PulseSchedule,
    model: &InternalModel,
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    let tol = Tolerance::new(opts.tol)?;
    let total = schedule.total_duration();
    let mut requested: Vec<f64> = opts
        .sample_times
        .iter()
        .copied()
        .filter(|t| (0.0..=total).contains(t))
        .collect();
    requested.extend(schedule.boundaries());
    requested.sort_by(f64::total_cmp);
    requested.dedup();

    let mut y: Vec<C64> = initial.0.to_vec();
    let mut samples = Vec::with_capacity(requested.len());
    let to_state = |y: &[C64]| TwoAtomState(std::array::from_fn(|i| y[i]));
    if requested.first() == Some(&0.0) {
        samples.push(Sample {
            t: 0.0,
            state: *initial,
        });
    }

    let mut solver = Dop853::new(DIM);
    for (seg, &start) in schedule.segments().iter().zip(schedule.starts()) {
        let end = start + seg.duration();
        let stops: Vec<f64> = requested
            .iter()
            .copied()
            .filter(|&t| t > start && t <= end)
            .collect();
        // the last segment's end is the schedule total, which may differ from start + duration in the last ulp
        let local: Vec<f64> = stops
            .iter()
            .map(|t| (t - start).min(seg.duration()))
            .collect();
        let mut k = 0;
        solver
            .integrate(
                |s, psi, out| apply_hamiltonian(model, &seg.controls(s), psi, out, 1),
                0.0,
                seg.duration(),
                &mut y,
                &tol,
                &local,
                |_, psi| {
                    samples.push(Sample {
                        t: stops[k],
                        state: to_state(psi),
                    });
                    k += 1;
                },
            )
            .map_err(|e| match e {
                crate::Error::Integration { time, reason } => crate::Error::Integration {
                    time: start + time,
                    reason,
                },
                other => other,
            })?;
    }
    Ok(Trajectory {
        samples,
        final_state: to_state(&y),
    })
}

/// CSV with columns `t`, `re_<ab>`, `im_<ab>` for the nine basis states, `norm2`.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    write!(w, "t")?;
    for i in 0..DIM {
        let l = super::label(i);
        write!(w, ",re_{l},im_{l}")?;
    }
    writeln!(w, ",norm2")?;
    for s in &traj.samples {
        write!(w, "{:.12e}", s.t)?;
        for c in &s.state.0 {
            write!(w, ",{:.12e},{:.12e}", c.re, c.im)?;
        }
        writeln!(w, ",{:.12e}", s.state.norm_sqr())?;
    }
    Ok(())
}
