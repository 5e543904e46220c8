use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::{Controls, Protocol, Scenario, ScenarioError};
use crate::atomic_structure::{Constants, InteractionGeometry, Length};
use crate::gate_protocols::{
    adiabatic_schedule, analyze_gate, calibrate, entanglement_phase_integral, model_a_schedule,
    model_a_with_wait, model_b_schedule, GateReport,
};
use crate::internal_dynamics::{
    propagate, write_trajectory_csv, InternalModel, PropagateOptions, PulseSchedule, TwoAtomState,
};
use crate::motional_errors::{
    simulate_joint_kick, simulate_trap_mismatch, BudgetInputs, JointOptions, MotionalBudget,
};

pub const MANIFEST: &str = "manifest.txt";
pub const LOCK_FILE: &str = ".rydgate.lock";
/// Every file a run may produce, besides the manifest.
pub const ARTIFACTS: [&str; 5] = [
    "gate_report.txt",
    "traces.csv",
    "dressed_curves.csv",
    "motional_budget.txt",
    super::SWEEP_FILE,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Run the protocol; adiabatic scenarios with a phase target are calibrated.
    Run,
    /// Calibrate the protocol's knob (model A wait, adiabatic duration).
    Calibrate,
    /// Run, then add the joint motional simulations to the budget.
    Motional,
}

/// A resolved schedule with its gate analysis.
#[derive(Debug, Clone)]
pub struct GateOutcome {
    pub schedule: PulseSchedule,
    pub report: GateReport,
    /// Knob name, calibrated value (SI) and objective evaluations.
    pub calibration: Option<(&'static str, f64, usize)>,
}

pub(crate) fn model(s: &Scenario) -> Result<InternalModel, ScenarioError> {
    Ok(InternalModel::new(s.physics.u, s.physics.gamma)?)
}

/// Builds (and if requested calibrates) the schedule and analyses the gate.
pub fn evaluate(s: &Scenario, mode: RunMode) -> Result<GateOutcome, ScenarioError> {
    let model = model(s)?;
    let tol = s.numerics.tol;
    let u = s.physics.u;
    let calibrated = |knob: &'static str, cal: crate::gate_protocols::Calibration| GateOutcome {
        schedule: cal.schedule,
        report: cal.report,
        calibration: Some((knob, cal.parameter, cal.evaluations)),
    };
    match (&s.controls, mode) {
        (Controls::ModelA { omega, phi_target }, RunMode::Calibrate) => {
            if u == 0.0 {
                return Err(crate::Error::Domain(
                    "u = 0 requires an infinite wait in model A".into(),
                )
                .into());
            }
            let guess = phi_target / u.abs();
            let cal = calibrate(
                |w| model_a_with_wait(*omega, w),
                &model,
                *phi_target,
                (0.5 * guess, 1.5 * guess),
                tol,
            )?;
            Ok(calibrated("wait", cal))
        }
        (Controls::ModelA { omega, phi_target }, _) => {
            plain(model_a_schedule(*omega, u, *phi_target)?, &model, tol)
        }
        (Controls::ModelB { .. }, RunMode::Calibrate) => Err(ScenarioError::config(
            "scenario.protocol",
            "model B has no calibration knob",
        )),
        (Controls::ModelB { omega1, omega2 }, _) => {
            plain(model_b_schedule(*omega1, *omega2, u)?, &model, tol)
        }
        (
            Controls::Adiabatic {
                pulse,
                duration,
                phi_target,
                bracket,
            },
            mode,
        ) => {
            let target = match (phi_target, mode) {
                (Some(p), _) => Some(*p),
                (None, RunMode::Calibrate) => Some(Scenario::default_phi_target()),
                (None, _) => None,
            };
            match (target, duration) {
                (Some(target), _) => {
                    let cal = calibrate(
                        |d| adiabatic_schedule(pulse, d),
                        &model,
                        target,
                        *bracket,
                        tol,
                    )?;
                    Ok(calibrated("duration", cal))
                }
                (None, Some(d)) => plain(adiabatic_schedule(pulse, *d)?, &model, tol),
                (None, None) => Err(ScenarioError::config("controls.duration_us", "missing")),
            }
        }
    }
}

fn plain(
    schedule: PulseSchedule,
    model: &InternalModel,
    tol: f64,
) -> Result<GateOutcome, ScenarioError> {
    let report = analyze_gate(&schedule, model, tol)?;
    Ok(GateOutcome {
        schedule,
        report,
        calibration: None,
    })
}

pub(crate) fn budget(
    s: &Scenario,
    outcome: &GateOutcome,
) -> Option<Result<MotionalBudget, ScenarioError>> {
    let (trap, geom) = (s.trap?, s.geometry?);
    let inputs = BudgetInputs {
        eta: geom.eta,
        omega0: s.controls.peak_rabi(),
        u: s.physics.u,
        duration: outcome.schedule.total_duration(),
        trap: trap.spec,
        phi: outcome.report.entanglement_phase,
        separation: geom.separation,
        wavelength: trap.wavelength,
    };
    Some(MotionalBudget::evaluate(&inputs).map_err(Into::into))
}

/// Record of a completed run, also written as `manifest.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub version: String,
    /// Resolved parameters after calibration, SI units.
    pub parameters: Vec<(String, String)>,
    pub runtime_seconds: f64,
    /// Files written, manifest last.
    pub files: Vec<String>,
}

impl RunManifest {
    fn render(&self) -> String {
        let mut out = format!("version = {}\n", self.version);
        for (k, v) in &self.parameters {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str(&format!("runtime_seconds = {:.3}\n", self.runtime_seconds));
        for f in &self.files {
            out.push_str(&format!("file = {f}\n"));
        }
        out
    }
}

/// Exclusive ownership of a run directory; the lock file is removed on drop.
pub(crate) struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub(crate) fn acquire(dir: &Path) -> Result<Self, ScenarioError> {
        fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(ScenarioError::Locked(dir.to_path_buf()))
            }
            Err(e) => Err(ScenarioError::io(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Writes the artifacts, clears stale ones from earlier runs, then writes the
/// manifest.
pub(crate) fn commit(
    dir: &Path,
    artifacts: Vec<(&'static str, Vec<u8>)>,
    parameters: Vec<(String, String)>,
    started: Instant,
) -> Result<RunManifest, ScenarioError> {
    let mut files = Vec::new();
    for (name, bytes) in &artifacts {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| ScenarioError::io(&path, e))?;
        files.push(name.to_string());
    }
    for stale in ARTIFACTS.iter().filter(|a| !files.iter().any(|f| f == *a)) {
        let path = dir.join(stale);
        if path.exists() {
            fs::remove_file(&path).map_err(|e| ScenarioError::io(&path, e))?;
        }
    }
    files.push(MANIFEST.to_string());
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        parameters,
        runtime_seconds: started.elapsed().as_secs_f64(),
        files,
    };
    let path = dir.join(MANIFEST);
    let mut f = File::create(&path).map_err(|e| ScenarioError::io(&path, e))?;
    f.write_all(manifest.render().as_bytes())
        .map_err(|e| ScenarioError::io(&path, e))?;
    Ok(manifest)
}

pub(crate) fn parameters(s: &Scenario, outcome: &GateOutcome) -> Vec<(String, String)> {
    let mut p = vec![
        ("scenario".to_string(), s.name.clone()),
        ("protocol".to_string(), s.protocol.name().to_string()),
        ("u".to_string(), format!("{:.12e}", s.physics.u)),
        ("gamma".to_string(), format!("{:.12e}", s.physics.gamma)),
    ];
    match &s.controls {
        Controls::ModelA { omega, phi_target } => {
            p.push(("omega".into(), format!("{omega:.12e}")));
            p.push(("phi_target".into(), format!("{phi_target:.12e}")));
        }
        Controls::ModelB { omega1, omega2 } => {
            p.push(("omega1".into(), format!("{omega1:.12e}")));
            p.push(("omega2".into(), format!("{omega2:.12e}")));
        }
        Controls::Adiabatic {
            pulse, phi_target, ..
        } => {
            p.push(("omega0".into(), format!("{:.12e}", pulse.omega0)));
            p.push(("delta0".into(), format!("{:.12e}", pulse.delta0)));
            p.push(("delta_min".into(), format!("{:.12e}", pulse.delta_min)));
            if let Some(phi) = phi_target {
                p.push(("phi_target".into(), format!("{phi:.12e}")));
            }
        }
    }
    p.push((
        "duration".into(),
        format!("{:.12e}", outcome.schedule.total_duration()),
    ));
    if let Some((knob, value, evals)) = outcome.calibration {
        p.push(("calibrated_knob".into(), knob.into()));
        p.push(("calibrated_value".into(), format!("{value:.12e}")));
        p.push(("calibration_evaluations".into(), evals.to_string()));
    }
    p.push(("tol".into(), format!("{:e}", s.numerics.tol)));
    p.push(("fock_cutoff".into(), s.numerics.fock_cutoff.to_string()));
    p
}

/// Executes a scenario into `out_dir`. Outputs are deterministic for a given
/// scenario and version, apart from the runtime recorded in the manifest.
pub fn run(s: &Scenario, out_dir: &Path, mode: RunMode) -> Result<RunManifest, ScenarioError> {
    let started = Instant::now();
    let _lock = DirLock::acquire(out_dir)?;
    let outcome = evaluate(s, mode)?;
    let mut artifacts: Vec<(&'static str, Vec<u8>)> = Vec::new();

    if s.outputs.gate_report {
        let mut text = String::new();
        for (k, v) in parameters(s, &outcome) {
            text.push_str(&format!("{k} = {v}\n"));
        }
        text.push_str(&outcome.report.to_string());
        artifacts.push(("gate_report.txt", text.into_bytes()));
    }
    if s.outputs.traces {
        let total = outcome.schedule.total_duration();
        let opts = PropagateOptions::new(s.numerics.tol)
            .with_uniform_samples(total, s.outputs.trace_samples);
        let traj = propagate(
            &TwoAtomState::uniform_qubit_superposition(),
            &outcome.schedule,
            &model(s)?,
            &opts,
        )?;
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).expect("writing to memory");
        artifacts.push(("traces.csv", buf));
    }
    if s.outputs.dressed_curves && s.protocol == Protocol::Adiabatic {
        let curves = entanglement_phase_integral(&outcome.schedule, s.physics.u)?;
        let mut buf = Vec::new();
        curves.write_csv(&mut buf).expect("writing to memory");
        artifacts.push(("dressed_curves.csv", buf));
    }
    if s.outputs.motional_budget || mode == RunMode::Motional {
        let Some(budget) = budget(s, &outcome) else {
            return Err(ScenarioError::config(
                "trap",
                "the motional budget needs [trap] and [geometry] sections",
            ));
        };
        let mut budget = budget?;
        if mode == RunMode::Motional {
            let (trap, geom) = (
                s.trap.expect("checked above"),
                s.geometry.expect("checked above"),
            );
            let model = model(s)?;
            let opts = JointOptions {
                cutoff: s.numerics.fock_cutoff,
                tol: s.numerics.tol,
                force_scale: 1.0,
            };
            let c = Constants::CODATA_2018;
            let geometry =
                InteractionGeometry::from_eta(Length::Meters(geom.separation), geom.eta, &c)?;
            let (kick, mismatch) = rayon::join(
                || simulate_joint_kick(&outcome.schedule, &model, &trap.spec, &geometry, &opts),
                || simulate_trap_mismatch(&outcome.schedule, &model, &trap.spec, &opts),
            );
            budget.p_k_numeric = Some(kick?.probability);
            budget.p_t_numeric = Some(mismatch?.probability);
        }
        artifacts.push(("motional_budget.txt", budget.to_string().into_bytes()));
    }
    commit(out_dir, artifacts, parameters(s, &outcome), started)
}
