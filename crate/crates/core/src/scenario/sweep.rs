use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use toml::Value;

use super::parse::from_table;
use super::run::{budget, commit, evaluate, DirLock, RunMode};
use super::{InteractionSource, Protocol, RunManifest, Scenario, ScenarioError};

pub const SWEEP_FILE: &str = "sweep.csv";

/// Knobs a sweep may vary, as `section.key` of the scenario file. Values are
/// in the file's units.
pub fn sweep_knobs(s: &Scenario) -> Vec<&'static str> {
    let mut knobs = vec!["physics.gamma_mhz", "numerics.tol"];
    if s.physics.source == InteractionSource::Direct {
        knobs.push("physics.u_mhz");
    }
    knobs.extend_from_slice(match s.protocol {
        Protocol::ModelA => &["controls.omega_mhz", "controls.phi_target"][..],
        Protocol::ModelB => &[
            "controls.omega_mhz",
            "controls.omega1_mhz",
            "controls.omega2_mhz",
        ][..],
        Protocol::Adiabatic => &[
            "controls.omega0_mhz",
            "controls.delta0_mhz",
            "controls.delta_min_mhz",
            "controls.duration_us",
        ][..],
    });
    if s.trap.is_some() {
        knobs.extend_from_slice(&["trap.nbar", "trap.omega_mhz", "trap.omega_prime_mhz"]);
    }
    if s.geometry.is_some() {
        knobs.push("geometry.eta");
    }
    knobs
}

/// Accepts either `section.key` or a bare key that is unambiguous.
fn resolve_knob(s: &Scenario, knob: &str) -> Result<&'static str, ScenarioError> {
    let knobs = sweep_knobs(s);
    let hits: Vec<&'static str> = knobs
        .iter()
        .copied()
        .filter(|k| *k == knob || k.split_once('.').map(|p| p.1) == Some(knob))
        .collect();
    match hits.as_slice() {
        [one] => Ok(one),
        _ => Err(ScenarioError::config(
            "knob",
            format!(
                "unknown knob {knob:?} for protocol {}; allowed: {}",
                s.protocol.name(),
                knobs.join(", ")
            ),
        )),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<RowValues, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowValues {
    pub entanglement_phase: f64,
    pub loss: f64,
    pub fidelity: f64,
    pub duration: f64,
    /// (p_k, p_t, Δn̄) bounds when the scenario has a trap and geometry.
    pub motional: Option<(f64, f64, f64)>,
}

fn substitute(s: &Scenario, knob: &str, value: f64) -> Result<Scenario, String> {
    let (section, key) = knob.split_once('.').expect("knobs are section.key");
    let mut doc = s.document.clone();
    let table = doc
        .entry(section)
        .or_insert_with(|| Value::Table(Default::default()))
        .as_table_mut()
        .ok_or_else(|| format!("[{section}] is not a table"))?;
    // duration and target are alternatives for the adiabatic gate
    if knob == "controls.duration_us" {
        table.remove("phi_target");
    }
    table.insert(key.to_string(), Value::Float(value));
    from_table(doc, None).map_err(|issues| {
        issues
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    })
}

fn evaluate_row(s: &Scenario, knob: &str, value: f64) -> SweepRow {
    let outcome = substitute(s, knob, value).and_then(|row| {
        let gate = evaluate(&row, RunMode::Run).map_err(|e| e.to_string())?;
        let motional = match budget(&row, &gate) {
            None => None,
            Some(b) => {
                let b = b.map_err(|e| e.to_string())?;
                Some((b.p_k.value, b.p_t.value, b.delta_nbar))
            }
        };
        Ok(RowValues {
            entanglement_phase: gate.report.entanglement_phase,
            loss: gate.report.loss,
            fidelity: gate.report.fidelity,
            duration: gate.schedule.total_duration(),
            motional,
        })
    });
    if let Err(e) = &outcome {
        log::warn!("sweep row {knob} = {value}: {e}");
    }
    SweepRow { value, outcome }
}

fn render(knob: &str, rows: &[SweepRow], motional: bool) -> String {
    let mut out = String::from("knob,value,status,entanglement_phase,loss,fidelity,duration");
    if motional {
        out.push_str(",p_k,p_t,delta_nbar");
    }
    out.push_str(",message\n");
    for row in rows {
        out.push_str(&format!("{knob},{:.12e}", row.value));
        match &row.outcome {
            Ok(v) => {
                out.push_str(&format!(
                    ",OK,{:.12e},{:.12e},{:.12e},{:.12e}",
                    v.entanglement_phase, v.loss, v.fidelity, v.duration
                ));
                if let Some((pk, pt, dn)) = v.motional {
                    out.push_str(&format!(",{pk:.12e},{pt:.12e},{dn:.12e}"));
                } else if motional {
                    out.push_str(",,,");
                }
                out.push_str(",\n");
            }
            Err(e) => {
                out.push_str(",FAILED,,,,");
                if motional {
                    out.push_str(",,,");
                }
                let msg = e.replace('"', "'").replace('\n', " ");
                out.push_str(&format!(",\"{msg}\"\n"));
            }
        }
    }
    out
}

/// Evaluates the scenario once per knob value, concurrently, and writes
/// `sweep.csv` (rows in input order) plus the manifest. Failing rows are
/// marked FAILED and do not stop the sweep.
pub fn sweep(
    s: &Scenario,
    knob: &str,
    values: &[f64],
    out_dir: &Path,
) -> Result<(Vec<SweepRow>, RunManifest), ScenarioError> {
    let knob = resolve_knob(s, knob)?;
    if values.is_empty() {
        return Err(ScenarioError::config(
            "values",
            "a sweep needs at least one value",
        ));
    }
    let started = Instant::now();
    let _lock = DirLock::acquire(out_dir)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&v| evaluate_row(s, knob, v))
        .collect();
    let motional = s.trap.is_some() && s.geometry.is_some();
    let csv = render(knob, &rows, motional);
    let params = vec![
        ("scenario".to_string(), s.name.clone()),
        ("protocol".to_string(), s.protocol.name().to_string()),
        ("knob".to_string(), knob.to_string()),
        (
            "values".to_string(),
            values
                .iter()
                .map(|v| format!("{v:e}"))
                .collect::<Vec<_>>()
                .join(" "),
        ),
        (
            "failed_rows".to_string(),
            rows.iter()
                .filter(|r| r.outcome.is_err())
                .count()
                .to_string(),
        ),
    ];
    let manifest = commit(
        out_dir,
        vec![(SWEEP_FILE, csv.into_bytes())],
        params,
        started,
    )?;
    Ok((rows, manifest))
}
