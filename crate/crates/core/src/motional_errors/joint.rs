//! Brute-force propagation of the internal levels together with truncated
//! harmonic-oscillator modes.
//!
//! The joint vector is laid out as `psi[internal * m + k]` with `m` the size of
//! the motional space. For two modes `k = k1 * n + k2`.

use num_complex::Complex64 as C64;

use super::TrapSpec;
use crate::atomic_structure::InteractionGeometry;
use crate::integrate::{Dop853, Tolerance};
use crate::internal_dynamics::{
    apply_hamiltonian, levels, InternalModel, Level, PulseSchedule, TwoAtomState, DIM, QUBIT_BASIS,
};
use crate::{Error, Result};

/// Relative change allowed between cutoffs N and N + 2.
pub const CONVERGENCE_LIMIT: f64 = 0.1;
pub const DEFAULT_CUTOFF: usize = 12;
pub const MIN_CUTOFF: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOptions {
    /// Fock states per mode, N ≥ 6. The run is repeated at N + 2 for the
    /// convergence check.
    pub cutoff: usize,
    pub tol: f64,
    /// Multiplies the dipole force; 0 switches the kick off while keeping u.
    pub force_scale: f64,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            tol: 1e-9,
            force_scale: 1.0,
        }
    }
}

/// Result of a joint simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcome {
    /// Probability of motional excitation with the atoms back in the qubit
    /// subspace, from the N + 2 run.
    pub probability: f64,
    /// Same quantity at cutoff N.
    pub probability_coarse: f64,
    /// |p(N+2) − p(N)| / p(N+2), or 0 when both are at round-off level.
    pub relative_change: f64,
    pub cutoff: usize,
    /// Population in the highest Fock state(s) of the N + 2 run.
    pub edge_population: f64,
    /// Internal state in the motional ground state(s) of the N + 2 run.
    pub ground_block: TwoAtomState,
}

/// Sparse real operator on the motional space.
type Sparse = Vec<(usize, usize, f64)>;

/// A motional operator acting when the internal state carries weight `w[i]`.
struct Coupling {
    weights: [f64; DIM],
    op: Sparse,
}

struct JointSystem {
    m: usize,
    free: Vec<f64>,
    couplings: Vec<Coupling>,
}

impl JointSystem {
    fn rhs(
        &self,
        model: &InternalModel,
        c: &crate::internal_dynamics::Controls,
        psi: &[C64],
        out: &mut [C64],
    ) {
        let m = self.m;
        apply_hamiltonian(model, c, psi, out, m);
        let minus_i = C64::new(0.0, -1.0);
        for i in 0..DIM {
            let block = i * m;
            for k in 0..m {
                if self.free[k] != 0.0 {
                    out[block + k] += minus_i * self.free[k] * psi[block + k];
                }
            }
            for cpl in &self.couplings {
                let w = cpl.weights[i];
                if w == 0.0 {
                    continue;
                }
                for &(r, col, v) in &cpl.op {
                    out[block + r] += minus_i * (w * v) * psi[block + col];
                }
            }
        }
    }

    fn run(&self, schedule: &PulseSchedule, model: &InternalModel, tol: f64) -> Result<Vec<C64>> {
        let tol = Tolerance::new(tol)?;
        let mut y = vec![C64::default(); DIM * self.m];
        y[QUBIT_BASIS[0] * self.m] = C64::new(1.0, 0.0);
        let mut solver = Dop853::new(y.len());
        for (seg, &start) in schedule.segments().iter().zip(schedule.starts()) {
            solver
                .integrate(
                    |s, psi, out| self.rhs(model, &seg.controls(s), psi, out),
                    0.0,
                    seg.duration(),
                    &mut y,
                    &tol,
                    &[],
                    |_, _| {},
                )
                .map_err(|e| match e {
                    Error::Integration { time, reason } => Error::Integration {
                        time: start + time,
                        reason,
                    },
                    other => other,
                })?;
        }
        Ok(y)
    }
}

/// b + b† truncated to `n` Fock states.
fn position(n: usize) -> Sparse {
    let mut op = Vec::new();
    for k in 1..n {
        let v = (k as f64).sqrt();
        op.push((k, k - 1, v));
        op.push((k - 1, k, v));
    }
    op
}

/// (b + b†)² with exact matrix elements inside the truncated space.
fn position_squared(n: usize) -> Sparse {
    let mut op = Vec::new();
    for k in 0..n {
        op.push((k, k, 2.0 * k as f64 + 1.0));
        if k + 2 < n {
            let v = (((k + 1) * (k + 2)) as f64).sqrt();
            op.push((k, k + 2, v));
            op.push((k + 2, k, v));
        }
    }
    op
}

fn weights(f: impl Fn(Level, Level) -> f64) -> [f64; DIM] {
    std::array::from_fn(|i| {
        let (a, b) = levels(i);
        f(a, b)
    })
}

struct Observables {
    excited: f64,
    edge: f64,
    ground_block: TwoAtomState,
}

/// Excitation probability: qubit-subspace population outside the motional
/// ground state. `is_edge` marks the outermost Fock states.
fn observe(y: &[C64], m: usize, is_edge: impl Fn(usize) -> bool) -> Observables {
    let mut excited = 0.0;
    let mut edge = 0.0;
    for i in 0..DIM {
        for k in 0..m {
            let p = y[i * m + k].norm_sqr();
            if k != 0 && QUBIT_BASIS.contains(&i) {
                excited += p;
            }
            if is_edge(k) {
                edge += p;
            }
        }
    }
    let ground_block = TwoAtomState(std::array::from_fn(|i| y[i * m]));
    Observables {
        excited,
        edge,
        ground_block,
    }
}

fn check_options(opts: &JointOptions) -> Result<()> {
    if opts.cutoff < MIN_CUTOFF {
        return Err(Error::domain(format!(
            "Fock cutoff must be >= {MIN_CUTOFF}, got {}",
            opts.cutoff
        )));
    }
    if !opts.force_scale.is_finite() {
        return Err(Error::domain("force scale must be finite"));
    }
    Tolerance::new(opts.tol).map(|_| ())
}

fn converge(
    opts: &JointOptions,
    run: impl Fn(usize) -> Result<Observables> + Sync,
) -> Result<JointOutcome> {
    check_options(opts)?;
    let (coarse, fine) = rayon::join(|| run(opts.cutoff), || run(opts.cutoff + 2));
    let (coarse, fine) = (coarse?, fine?);
    // below this level the excitation is integration noise
    let floor = 10.0 * opts.tol;
    let relative_change = if fine.excited <= floor && coarse.excited <= floor {
        0.0
    } else {
        (fine.excited - coarse.excited).abs() / fine.excited.max(coarse.excited)
    };
    if relative_change >= CONVERGENCE_LIMIT {
        return Err(Error::Convergence {
            cutoff: opts.cutoff,
            change: relative_change,
        });
    }
    Ok(JointOutcome {
        probability: fine.excited,
        probability_coarse: coarse.excited,
        relative_change,
        cutoff: opts.cutoff,
        edge_population: fine.edge,
        ground_block: fine.ground_block,
    })
}

/// Internal levels ⊗ relative-coordinate oscillator. The force term
/// −F(ẑ − R) = −3uη(b + b†) acts on |rr⟩ only; the oscillator frequency is the
/// ground-state trap frequency ω. Starts in |gg⟩ ⊗ |0⟩.
pub fn simulate_joint_kick(
    schedule: &PulseSchedule,
    model: &InternalModel,
    trap: &TrapSpec,
    geom: &InteractionGeometry,
    opts: &JointOptions,
) -> Result<JointOutcome> {
    let strength = -3.0 * model.u() * geom.eta() * opts.force_scale;
    converge(opts, |n| {
        let system = JointSystem {
            m: n,
            free: (0..n).map(|k| trap.omega * k as f64).collect(),
            couplings: vec![Coupling {
                weights: weights(|a, b| {
                    if a == Level::R && b == Level::R {
                        strength
                    } else {
                        0.0
                    }
                }),
                op: position(n),
            }],
        };
        let y = system.run(schedule, model, opts.tol)?;
        Ok(observe(&y, n, |k| k == n - 1))
    })
}

/// Internal levels ⊗ one oscillator per atom. While atom j is in |r⟩ its trap
/// frequency changes from ω to ω′, i.e. κ(bⱼ + bⱼ†)² with κ = (ω′² − ω²)/4ω.
/// Starts in |gg⟩ ⊗ |00⟩.
pub fn simulate_trap_mismatch(
    schedule: &PulseSchedule,
    model: &InternalModel,
    trap: &TrapSpec,
    opts: &JointOptions,
) -> Result<JointOutcome> {
    let kappa =
        (trap.omega_prime * trap.omega_prime - trap.omega * trap.omega) / (4.0 * trap.omega);
    converge(opts, |n| {
        let single = position_squared(n);
        let first: Sparse = single
            .iter()
            .flat_map(|&(r, c, v)| (0..n).map(move |k2| (r * n + k2, c * n + k2, v)))
            .collect();
        let second: Sparse = single
            .iter()
            .flat_map(|&(r, c, v)| (0..n).map(move |k1| (k1 * n + r, k1 * n + c, v)))
            .collect();
        let system = JointSystem {
            m: n * n,
            free: (0..n * n)
                .map(|k| trap.omega * ((k / n) + (k % n)) as f64)
                .collect(),
            couplings: vec![
                Coupling {
                    weights: weights(|a, _| if a == Level::R { kappa } else { 0.0 }),
                    op: first,
                },
                Coupling {
                    weights: weights(|_, b| if b == Level::R { kappa } else { 0.0 }),
                    op: second,
                },
            ],
        };
        let y = system.run(schedule, model, opts.tol)?;
        Ok(observe(&y, n * n, |k| k / n == n - 1 || k % n == n - 1))
    })
}
