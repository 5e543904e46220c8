use std::f64::consts::PI;
use std::path::Path;

use toml::{Table, Value};

use super::{
    ConfigIssue, Controls, Geometry, InteractionSource, Numerics, Outputs, Physics, Protocol,
    Scenario, ScenarioError, TrapConfig,
};
use crate::atomic_structure::{
    dipole_dipole_energy, Constants, InteractionGeometry, Length, PhysicalContext, StarkState,
};
use crate::gate_protocols::AdiabaticPulse;
use crate::motional_errors::{TrapSpec, MIN_CUTOFF};

const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
const MAX_CUTOFF: usize = 40;

const SECTIONS: &[(&str, &[&str])] = &[
    ("scenario", &["protocol", "name"]),
    (
        "physics",
        &[
            "u_mhz",
            "gamma_mhz",
            "angular",
            "state1",
            "state2",
            "quantum_defect1",
            "quantum_defect2",
        ],
    ),
    (
        "geometry",
        &["separation_um", "separation_a0", "eta", "width_nm"],
    ),
    (
        "controls",
        &[
            "omega_mhz",
            "omega1_mhz",
            "omega2_mhz",
            "phi_target",
            "omega0_mhz",
            "delta0_mhz",
            "delta_min_mhz",
            "duration_us",
            "bracket_us",
        ],
    ),
    (
        "trap",
        &[
            "omega_mhz",
            "omega_prime_mhz",
            "mass_amu",
            "nbar",
            "wavelength_nm",
        ],
    ),
    (
        "outputs",
        &[
            "gate_report",
            "traces",
            "dressed_curves",
            "motional_budget",
            "trace_samples",
        ],
    ),
    ("numerics", &["tol", "fock_cutoff"]),
];

/// Reads and validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    parse_str(&text).map_err(ScenarioError::Config)
}

/// Validates scenario text, reporting every problem found.
pub fn parse_str(text: &str) -> Result<Scenario, Vec<ConfigIssue>> {
    let document: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            let e: toml::de::Error = e;
            let line = e.span().map(|s| line_of(text, s.start));
            return Err(vec![ConfigIssue {
                line,
                field: "syntax".into(),
                message: e.message().to_string(),
            }]);
        }
    };
    from_table(document, Some(text))
}

pub(super) fn from_table(
    document: Table,
    text: Option<&str>,
) -> Result<Scenario, Vec<ConfigIssue>> {
    let mut r = Reader {
        doc: &document,
        text,
        issues: Vec::new(),
    };
    r.check_layout();

    let protocol = match r.string("scenario", "protocol") {
        Some(p) => match p.as_str() {
            "model_a" => Some(Protocol::ModelA),
            "model_b" => Some(Protocol::ModelB),
            "adiabatic" => Some(Protocol::Adiabatic),
            other => {
                r.issue(
                    "scenario",
                    "protocol",
                    format!(
                        "unknown protocol {other:?}; allowed: {}",
                        Protocol::NAMES.join(", ")
                    ),
                );
                None
            }
        },
        None => {
            r.issue(
                "scenario",
                "protocol",
                format!("missing; allowed: {}", Protocol::NAMES.join(", ")),
            );
            None
        }
    };
    let name = r.string("scenario", "name").unwrap_or_default();

    let angular = r.boolean("physics", "angular").unwrap_or(true);
    let freq = if angular { 1e6 } else { 2.0 * PI * 1e6 };
    let constants = Constants::CODATA_2018;

    let geometry = r.geometry(&constants);
    let physics = r.physics(freq, geometry.as_ref());
    let controls = protocol.and_then(|p| r.controls(p, freq));
    let trap = r.trap(freq);
    let outputs = r.outputs();
    let numerics = r.numerics();

    if let (Some(o), Some(p)) = (&outputs, protocol) {
        if o.dressed_curves && p != Protocol::Adiabatic {
            r.issue(
                "outputs",
                "dressed_curves",
                "dressed curves need the adiabatic protocol",
            );
        }
        if o.motional_budget {
            if trap.is_none() {
                r.issue("outputs", "motional_budget", "needs a [trap] section");
            }
            if geometry.is_none() {
                r.issue("outputs", "motional_budget", "needs a [geometry] section");
            }
        }
    }

    match (protocol, physics, controls, outputs, numerics) {
        (Some(protocol), Some(physics), Some(controls), Some(outputs), Some(numerics))
            if r.issues.is_empty() =>
        {
            Ok(Scenario {
                name,
                protocol,
                physics,
                geometry,
                controls,
                trap,
                outputs,
                numerics,
                document: document.clone(),
            })
        }
        _ => {
            if r.issues.is_empty() {
                r.issues.push(ConfigIssue {
                    line: None,
                    field: "scenario".into(),
                    message: "incomplete".into(),
                });
            }
            Err(r.issues)
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Reader<'a> {
    doc: &'a Table,
    text: Option<&'a str>,
    issues: Vec<ConfigIssue>,
}

impl Reader<'_> {
    /// Line of `key` inside `[section]`, or of the section header when `key` is empty.
    fn locate(&self, section: &str, key: &str) -> Option<usize> {
        let text = self.text?;
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(h) = line.strip_prefix('[') {
                current = h.trim_end_matches(']').trim().to_string();
                if key.is_empty() && current == section {
                    return Some(i + 1);
                }
                continue;
            }
            if current == section && !key.is_empty() {
                if let Some(rest) = line.strip_prefix(key) {
                    if rest.trim_start().starts_with('=') {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    fn issue(&mut self, section: &str, key: &str, message: impl Into<String>) {
        let line = self
            .locate(section, key)
            .or_else(|| self.locate(section, ""));
        let field = if key.is_empty() {
            section.to_string()
        } else {
            format!("{section}.{key}")
        };
        self.issues.push(ConfigIssue {
            line,
            field,
            message: message.into(),
        });
    }

    fn check_layout(&mut self) {
        for (name, value) in self.doc {
            match SECTIONS.iter().find(|(s, _)| s == name) {
                None => {
                    let known: Vec<&str> = SECTIONS.iter().map(|s| s.0).collect();
                    self.issue(
                        name,
                        "",
                        format!("unknown section; allowed: {}", known.join(", ")),
                    );
                }
                Some((_, keys)) => match value.as_table() {
                    None => self.issue(name, "", "must be a table"),
                    Some(t) => {
                        for k in t.keys() {
                            if !keys.contains(&k.as_str()) {
                                self.issue(
                                    name,
                                    k,
                                    format!("unknown key; allowed: {}", keys.join(", ")),
                                );
                            }
                        }
                    }
                },
            }
        }
    }

    fn value(&self, section: &str, key: &str) -> Option<&Value> {
        self.doc.get(section)?.as_table()?.get(key)
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.value(section, key).is_some()
    }

    fn section_present(&self, section: &str) -> bool {
        self.doc.get(section).is_some()
    }

    fn number(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = match self.value(section, key)? {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            other => {
                let t = other.type_str();
                self.issue(section, key, format!("expected a number, found {t}"));
                return None;
            }
        };
        if !v.is_finite() {
            self.issue(section, key, "must be finite");
            return None;
        }
        Some(v)
    }

    fn required(&mut self, section: &str, key: &str, why: &str) -> Option<f64> {
        if !self.has(section, key) {
            self.issue(section, key, format!("missing ({why})"));
            return None;
        }
        self.number(section, key)
    }

    fn positive(&mut self, section: &str, key: &str, v: Option<f64>) -> Option<f64> {
        match v {
            Some(x) if x <= 0.0 => {
                self.issue(section, key, format!("must be > 0, got {x}"));
                None
            }
            other => other,
        }
    }

    fn string(&mut self, section: &str, key: &str) -> Option<String> {
        match self.value(section, key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                let t = other.type_str();
                self.issue(section, key, format!("expected a string, found {t}"));
                None
            }
        }
    }

    fn boolean(&mut self, section: &str, key: &str) -> Option<bool> {
        match self.value(section, key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                let t = other.type_str();
                self.issue(section, key, format!("expected true or false, found {t}"));
                None
            }
        }
    }

    fn integers(&mut self, section: &str, key: &str, len: usize) -> Option<Vec<i64>> {
        let arr = self.value(section, key)?.as_array().cloned();
        let ints: Option<Vec<i64>> = arr
            .as_ref()
            .and_then(|a| a.iter().map(Value::as_integer).collect());
        match ints {
            Some(v) if v.len() == len => Some(v),
            _ => {
                self.issue(section, key, format!("expected an array of {len} integers"));
                None
            }
        }
    }

    fn geometry(&mut self, constants: &Constants) -> Option<Geometry> {
        if !self.section_present("geometry") {
            return None;
        }
        let sep = match (
            self.has("geometry", "separation_um"),
            self.has("geometry", "separation_a0"),
        ) {
            (true, false) => self
                .number("geometry", "separation_um")
                .map(|v| Length::Meters(v * 1e-6)),
            (false, true) => self
                .number("geometry", "separation_a0")
                .map(Length::BohrRadii),
            _ => {
                self.issue(
                    "geometry",
                    "separation_um",
                    "give exactly one of separation_um, separation_a0",
                );
                None
            }
        }?;
        let geom = match (
            self.has("geometry", "eta"),
            self.has("geometry", "width_nm"),
        ) {
            (true, false) => {
                let eta = self.number("geometry", "eta")?;
                InteractionGeometry::from_eta(sep, eta, constants)
            }
            (false, true) => {
                let w = self.number("geometry", "width_nm")?;
                InteractionGeometry::new(sep, Length::Meters(w * 1e-9), constants)
            }
            (false, false) => InteractionGeometry::new(sep, Length::Meters(0.0), constants),
            (true, true) => {
                self.issue("geometry", "eta", "give at most one of eta, width_nm");
                return None;
            }
        };
        match geom {
            Ok(g) => Some(Geometry {
                separation: g.separation(),
                eta: g.eta(),
            }),
            Err(e) => {
                self.issue("geometry", "", e.to_string());
                None
            }
        }
    }

    fn stark_state(&mut self, idx: usize) -> Option<StarkState> {
        let key = format!("state{idx}");
        let qn = self.integers("physics", &key, 3)?;
        let defect = self
            .number("physics", &format!("quantum_defect{idx}"))
            .unwrap_or(0.0);
        if qn[0] < 1 || qn[0] > u32::MAX as i64 {
            self.issue("physics", &key, "n must be >= 1");
            return None;
        }
        match StarkState::new(qn[0] as u32, qn[1] as i32, qn[2] as i32, defect) {
            Ok(s) => Some(s),
            Err(e) => {
                self.issue("physics", &key, e.to_string());
                None
            }
        }
    }

    fn physics(&mut self, freq: f64, geometry: Option<&Geometry>) -> Option<Physics> {
        if !self.section_present("physics") {
            self.issue("physics", "", "missing section");
            return None;
        }
        let gamma = self.number("physics", "gamma_mhz").unwrap_or(0.0) * freq;
        if gamma < 0.0 {
            self.issue("physics", "gamma_mhz", "loss rate must be >= 0");
        }
        let direct = self.has("physics", "u_mhz");
        let stark = self.has("physics", "state1");
        match (direct, stark) {
            (true, false) => {
                let u = self.number("physics", "u_mhz")? * freq;
                Some(Physics {
                    u,
                    gamma,
                    source: InteractionSource::Direct,
                })
            }
            (false, true) => {
                let s1 = self.stark_state(1);
                let s2 = if self.has("physics", "state2") {
                    self.stark_state(2)
                } else {
                    s1
                };
                let (s1, s2) = (s1?, s2?);
                let Some(g) = geometry else {
                    self.issue(
                        "physics",
                        "state1",
                        "a Stark pair needs a [geometry] section with the separation",
                    );
                    return None;
                };
                let ctx = PhysicalContext::new(0.0).expect("zero field is valid");
                let geom = InteractionGeometry::new(
                    Length::Meters(g.separation),
                    Length::Meters(g.eta * g.separation),
                    ctx.constants(),
                )
                .ok()?;
                let u = dipole_dipole_energy(&s1, &s2, &geom, &ctx);
                Some(Physics {
                    u,
                    gamma,
                    source: InteractionSource::Stark([s1, s2]),
                })
            }
            _ => {
                self.issue(
                    "physics",
                    "u_mhz",
                    "give exactly one of u_mhz or a Stark pair (state1, state2)",
                );
                None
            }
        }
    }

    fn phi_target(&mut self) -> Option<f64> {
        let phi = self.number("controls", "phi_target")?;
        if !(phi > 0.0 && phi <= 2.0 * PI) {
            self.issue(
                "controls",
                "phi_target",
                format!("must lie in (0, 2pi], got {phi}"),
            );
            return None;
        }
        Some(phi)
    }

    fn forbid(&mut self, keys: &[&str], protocol: Protocol) {
        for k in keys {
            if self.has("controls", k) {
                self.issue(
                    "controls",
                    k,
                    format!("not used by protocol {}", protocol.name()),
                );
            }
        }
    }

    fn controls(&mut self, protocol: Protocol, freq: f64) -> Option<Controls> {
        if !self.section_present("controls") {
            self.issue("controls", "", "missing section");
            return None;
        }
        match protocol {
            Protocol::ModelA => {
                self.forbid(
                    &[
                        "omega1_mhz",
                        "omega2_mhz",
                        "omega0_mhz",
                        "delta0_mhz",
                        "delta_min_mhz",
                        "duration_us",
                        "bracket_us",
                    ],
                    protocol,
                );
                let omega =
                    self.required("controls", "omega_mhz", "Rabi frequency of the pi pulses");
                let omega = self.positive("controls", "omega_mhz", omega)? * freq;
                let phi_target = if self.has("controls", "phi_target") {
                    self.phi_target()?
                } else {
                    Scenario::default_phi_target()
                };
                Some(Controls::ModelA { omega, phi_target })
            }
            Protocol::ModelB => {
                self.forbid(
                    &[
                        "omega0_mhz",
                        "delta0_mhz",
                        "delta_min_mhz",
                        "duration_us",
                        "bracket_us",
                    ],
                    protocol,
                );
                if self.has("controls", "phi_target") {
                    self.issue(
                        "controls",
                        "phi_target",
                        "model B has no phase knob; its phase is fixed near pi",
                    );
                }
                let (o1, o2) = if self.has("controls", "omega_mhz") {
                    if self.has("controls", "omega1_mhz") || self.has("controls", "omega2_mhz") {
                        self.issue(
                            "controls",
                            "omega_mhz",
                            "give either omega_mhz or omega1_mhz/omega2_mhz",
                        );
                    }
                    let o = self.number("controls", "omega_mhz");
                    let o = self.positive("controls", "omega_mhz", o);
                    (o, o)
                } else {
                    let o1 = self.required("controls", "omega1_mhz", "pi pulses on atom 1");
                    let o2 = self.required("controls", "omega2_mhz", "2pi pulse on atom 2");
                    (
                        self.positive("controls", "omega1_mhz", o1),
                        self.positive("controls", "omega2_mhz", o2),
                    )
                };
                Some(Controls::ModelB {
                    omega1: o1? * freq,
                    omega2: o2? * freq,
                })
            }
            Protocol::Adiabatic => {
                self.forbid(&["omega_mhz", "omega1_mhz", "omega2_mhz"], protocol);
                let o0 = self.required("controls", "omega0_mhz", "peak Rabi frequency");
                let o0 = self.positive("controls", "omega0_mhz", o0);
                let d0 = self.required("controls", "delta0_mhz", "detuning at the pulse edges");
                let dmin = match self.has("controls", "delta_min_mhz") {
                    true => self.number("controls", "delta_min_mhz"),
                    false => d0,
                };
                let duration = self.number("controls", "duration_us");
                let duration = self
                    .positive("controls", "duration_us", duration)
                    .map(|d| d * 1e-6);
                let phi_target = if self.has("controls", "phi_target") {
                    Some(self.phi_target()?)
                } else {
                    None
                };
                if duration.is_none()
                    && phi_target.is_none()
                    && !self.has("controls", "duration_us")
                {
                    self.issue(
                        "controls",
                        "duration_us",
                        "give duration_us, phi_target, or both",
                    );
                }
                let bracket = match self.value("controls", "bracket_us") {
                    None => (1e-6, 5e-6),
                    Some(v) => {
                        let pair: Option<Vec<f64>> = v.as_array().and_then(|a| {
                            a.iter()
                                .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
                                .collect()
                        });
                        match pair.as_deref() {
                            Some(&[lo, hi]) if lo > 0.0 && hi > lo => (lo * 1e-6, hi * 1e-6),
                            _ => {
                                self.issue(
                                    "controls",
                                    "bracket_us",
                                    "expected [low, high] with 0 < low < high",
                                );
                                return None;
                            }
                        }
                    }
                };
                let pulse = AdiabaticPulse {
                    omega0: o0? * freq,
                    delta0: d0? * freq,
                    delta_min: dmin? * freq,
                };
                Some(Controls::Adiabatic {
                    pulse,
                    duration,
                    phi_target,
                    bracket,
                })
            }
        }
    }

    fn trap(&mut self, freq: f64) -> Option<TrapConfig> {
        if !self.section_present("trap") {
            return None;
        }
        let omega = self.required("trap", "omega_mhz", "ground-state trap frequency");
        let omega_prime = self.required("trap", "omega_prime_mhz", "Rydberg-state trap frequency");
        let mass = self.required("trap", "mass_amu", "atomic mass");
        let nbar = self.number("trap", "nbar").unwrap_or(0.0);
        let wavelength = self.required("trap", "wavelength_nm", "excitation wavelength");
        let wavelength = self.positive("trap", "wavelength_nm", wavelength);
        let (omega, omega_prime, mass, wavelength) = (omega?, omega_prime?, mass?, wavelength?);
        match TrapSpec::new(omega * freq, omega_prime * freq, mass * ATOMIC_MASS, nbar) {
            Ok(spec) => Some(TrapConfig {
                spec,
                wavelength: wavelength * 1e-9,
            }),
            Err(e) => {
                self.issue("trap", "", e.to_string());
                None
            }
        }
    }

    fn outputs(&mut self) -> Option<Outputs> {
        let mut o = Outputs::default();
        let before = self.issues.len();
        if let Some(b) = self.boolean("outputs", "gate_report") {
            o.gate_report = b;
        }
        if let Some(b) = self.boolean("outputs", "traces") {
            o.traces = b;
        }
        if let Some(b) = self.boolean("outputs", "dressed_curves") {
            o.dressed_curves = b;
        }
        if let Some(b) = self.boolean("outputs", "motional_budget") {
            o.motional_budget = b;
        }
        if let Some(n) = self.number("outputs", "trace_samples") {
            if n < 2.0 || n.fract() != 0.0 || n > 1e6 {
                self.issue("outputs", "trace_samples", "must be an integer in [2, 1e6]");
            } else {
                o.trace_samples = n as usize;
            }
        }
        (self.issues.len() == before).then_some(o)
    }

    fn numerics(&mut self) -> Option<Numerics> {
        let mut n = Numerics::default();
        let before = self.issues.len();
        if let Some(tol) = self.number("numerics", "tol") {
            if tol >= 1e-13 && tol < 1e-3 {
                n.tol = tol;
            } else {
                self.issue(
                    "numerics",
                    "tol",
                    format!("must lie in [1e-13, 1e-3), got {tol:e}"),
                );
            }
        }
        if let Some(c) = self.number("numerics", "fock_cutoff") {
            if c.fract() != 0.0 || c < MIN_CUTOFF as f64 || c > MAX_CUTOFF as f64 {
                self.issue(
                    "numerics",
                    "fock_cutoff",
                    format!("must be an integer in [{MIN_CUTOFF}, {MAX_CUTOFF}]"),
                );
            } else {
                n.fock_cutoff = c as usize;
            }
        }
        (self.issues.len() == before).then_some(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[scenario]\nprotocol = \"model_a\"\n\n[physics]\nu_mhz = 1800\n\n[controls]\nomega_mhz = 180000\n";

    #[test]
    fn minimal_model_a_defaults() {
        let s = parse_str(MINIMAL).unwrap();
        assert_eq!(s.protocol, Protocol::ModelA);
        assert_eq!(s.numerics.tol, 1e-9);
        assert_eq!(s.numerics.fock_cutoff, 12);
        assert_eq!(s.outputs, Outputs::default());
        assert!(s.outputs.gate_report && !s.outputs.traces);
        assert_eq!(s.physics.u, 1.8e9);
        assert_eq!(s.physics.gamma, 0.0);
        assert_eq!(
            s.controls,
            Controls::ModelA {
                omega: 1.8e11,
                phi_target: PI
            }
        );
    }

    #[test]
    fn cyclic_units() {
        let text = MINIMAL.replace("u_mhz = 1800", "u_mhz = 1800\nangular = false");
        let s = parse_str(&text).unwrap();
        assert!((s.physics.u - 2.0 * PI * 1.8e9).abs() < 1e-3);
    }

    #[test]
    fn unknown_protocol_lists_allowed() {
        let text = MINIMAL.replace("model_a", "model_c");
        let issues = parse_str(&text).unwrap_err();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].line, Some(2));
        assert!(issues[0].message.contains("model_a, model_b, adiabatic"));
    }

    #[test]
    fn all_issues_reported() {
        let text = "[scenario]\nprotocol = \"adiabatic\"\n[physics]\nu_mhz = \"big\"\n[controls]\nomega0_mhz = -1\ncolour = 3\n[numerics]\ntol = 0.5\n";
        let issues = parse_str(text).unwrap_err();
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        for f in [
            "physics.u_mhz",
            "controls.omega0_mhz",
            "controls.colour",
            "controls.delta0_mhz",
            "numerics.tol",
        ] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
        let colour = issues
            .iter()
            .find(|i| i.field == "controls.colour")
            .unwrap();
        assert_eq!(colour.line, Some(7));
    }

    #[test]
    fn syntax_error_has_line() {
        let issues = parse_str("[scenario]\nprotocol = \n").unwrap_err();
        assert_eq!(issues[0].field, "syntax");
        assert_eq!(issues[0].line, Some(2));
    }

    #[test]
    fn stark_pair_with_geometry() {
        let text = "[scenario]\nprotocol = \"model_b\"\n[physics]\nstate1 = [2, 1, 0]\n[geometry]\nseparation_a0 = 1000\n[controls]\nomega_mhz = 10\n";
        let s = parse_str(text).unwrap();
        assert!((s.physics.u / -744144720.487646 - 1.0).abs() < 1e-12);
        assert!(matches!(s.physics.source, InteractionSource::Stark(_)));
    }

    #[test]
    fn model_b_rejects_phase_target() {
        let text = "[scenario]\nprotocol = \"model_b\"\n[physics]\nu_mhz = 1800\n[controls]\nomega_mhz = 100\nphi_target = 1.0\n";
        let issues = parse_str(text).unwrap_err();
        assert_eq!(issues[0].field, "controls.phi_target");
    }

    #[test]
    fn budget_needs_trap_and_geometry() {
        let text = format!("{MINIMAL}[outputs]\nmotional_budget = true\n");
        let issues = parse_str(&text).unwrap_err();
        assert_eq!(issues.len(), 2);
    }
}
