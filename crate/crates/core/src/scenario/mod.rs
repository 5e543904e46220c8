//! Scenario files, runs and sweeps.
//!
//! A scenario is a TOML file with the sections `[scenario]`, `[physics]`,
//! `[geometry]`, `[controls]`, `[trap]`, `[outputs]` and `[numerics]`; see the
//! README for every key. Frequencies are given in MHz and interpreted as
//! angular (rad/μs) unless `physics.angular = false`.

mod parse;
mod run;
mod sweep;

use std::f64::consts::PI;
use std::fmt;
use std::io;
use std::path::PathBuf;

use crate::atomic_structure::StarkState;
use crate::gate_protocols::AdiabaticPulse;
use crate::motional_errors::TrapSpec;

pub use parse::{parse_scenario, parse_str};
pub use run::{evaluate, run, GateOutcome, RunManifest, RunMode, ARTIFACTS, LOCK_FILE, MANIFEST};
pub use sweep::{sweep, sweep_knobs, SweepRow, SWEEP_FILE};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RYDGATE_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    ModelA,
    ModelB,
    Adiabatic,
}

impl Protocol {
    pub const NAMES: [&'static str; 3] = ["model_a", "model_b", "adiabatic"];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::ModelA => "model_a",
            Protocol::ModelB => "model_b",
            Protocol::Adiabatic => "adiabatic",
        }
    }
}

/// Where the interaction energy came from.
#[derive(Debug, Clone, PartialEq)]
pub enum InteractionSource {
    Direct,
    Stark([StarkState; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    /// Interaction energy u in rad/s.
    pub u: f64,
    /// Rydberg loss rate γ in rad/s.
    pub gamma: f64,
    pub source: InteractionSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Separation R in meters.
    pub separation: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controls {
    ModelA {
        omega: f64,
        phi_target: f64,
    },
    ModelB {
        omega1: f64,
        omega2: f64,
    },
    Adiabatic {
        pulse: AdiabaticPulse,
        /// Fixed duration; ignored when the run calibrates.
        duration: Option<f64>,
        phi_target: Option<f64>,
        /// Duration bracket for calibration, seconds.
        bracket: (f64, f64),
    },
}

impl Controls {
    /// Largest Rabi frequency of the schedule.
    pub fn peak_rabi(&self) -> f64 {
        match self {
            Controls::ModelA { omega, .. } => omega.abs(),
            Controls::ModelB { omega1, omega2 } => omega1.abs().max(omega2.abs()),
            Controls::Adiabatic { pulse, .. } => pulse.omega0.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    pub spec: TrapSpec,
    /// Excitation laser wavelength in meters.
    pub wavelength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub gate_report: bool,
    pub traces: bool,
    pub dressed_curves: bool,
    pub motional_budget: bool,
    /// Evenly spaced trace samples in addition to the segment boundaries.
    pub trace_samples: usize,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            gate_report: true,
            traces: false,
            dressed_curves: false,
            motional_budget: false,
            trace_samples: 401,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub tol: f64,
    pub fock_cutoff: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            fock_cutoff: crate::motional_errors::DEFAULT_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub protocol: Protocol,
    pub physics: Physics,
    pub geometry: Option<Geometry>,
    pub controls: Controls,
    pub trap: Option<TrapConfig>,
    pub outputs: Outputs,
    pub numerics: Numerics,
    /// The parsed document, kept so sweeps can substitute knob values.
    pub(crate) document: toml::Table,
}

impl Scenario {
    pub fn default_phi_target() -> f64 {
        PI
    }
}

/// One validation problem in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Exit-code classes of the command line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Io = 3,
    Config = 4,
    Numeric = 5,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("run directory {0} is locked by another process")]
    Locked(PathBuf),
    #[error("invalid scenario:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigIssue>),
    #[error(transparent)]
    Numeric(#[from] crate::Error),
}

impl ScenarioError {
    pub fn class(&self) -> ExitClass {
        match self {
            ScenarioError::Io { .. } | ScenarioError::Locked(_) => ExitClass::Io,
            ScenarioError::Config(_) => ExitClass::Config,
            ScenarioError::Numeric(_) => ExitClass::Numeric,
        }
    }

    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        ScenarioError::Config(vec![ConfigIssue {
            line: None,
            field: field.into(),
            message: message.into(),
        }])
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ScenarioError::Io {
            path: path.into(),
            source,
        }
    }
}
