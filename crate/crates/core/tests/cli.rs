use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn rydgate(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydgate"))
        .args(args)
        .env("RYDGATE_OUT", out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_succeeds_and_manifest_matches_directory() {
    let out = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("model_b.toml");
    let o = rydgate(&["gate", "run", scenario.to_str().unwrap()], out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let manifest = std::fs::read_to_string(out.path().join("manifest.txt")).unwrap();
    let mut listed: Vec<String> = manifest
        .lines()
        .filter_map(|l| l.strip_prefix("file = "))
        .map(str::to_string)
        .collect();
    let mut present: Vec<String> = std::fs::read_dir(out.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    listed.sort();
    present.sort();
    assert_eq!(listed, present);
}

#[test]
fn missing_file_is_an_io_error() {
    let out = tempfile::tempdir().unwrap();
    let o = rydgate(&["gate", "run", "/nonexistent/scenario.toml"], out.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_protocol_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.toml",
        "[scenario]\nprotocol = \"model_c\"\n[physics]\nu_mhz = 1800\n",
    );
    let o = rydgate(&["gate", "run", &path], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("model_c"), "{err}");
}

#[test]
fn unreachable_target_is_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    // a bracket whose phases do not straddle the target
    let path = write(
        dir.path(),
        "adiabatic.toml",
        "[scenario]\nprotocol = \"adiabatic\"\n[physics]\nu_mhz = 1800\n[controls]\nomega0_mhz = 100\n\
         delta0_mhz = 1700\ndelta_min_mhz = 50\nphi_target = 3.14159\nbracket_us = [2.0, 2.1]\n",
    );
    let o = rydgate(&["gate", "calibrate", &path], &dir.path().join("out"));
    assert_eq!(
        o.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn usage_errors_exit_with_2() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(rydgate(&["gate"], out.path()).status.code(), Some(2));
    assert_eq!(
        rydgate(&["sweep", "x.toml", "--knob", "u_mhz"], out.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn interaction_prints_energy_and_force() {
    let out = tempfile::tempdir().unwrap();
    let o = rydgate(
        &[
            "interaction",
            "--state1",
            "25,24,0",
            "--separation-a0",
            "2500",
        ],
        out.path(),
    );
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .unwrap()
            .trim_start_matches(" = ")
            .parse()
            .unwrap()
    };
    let (u, f, r) = (
        value("u_rad_per_s"),
        value("force_rad_per_s_per_m"),
        value("separation_m"),
    );
    assert!(u < 0.0);
    assert!((f * r / u - 3.0).abs() < 1e-9);
}

#[test]
fn runs_are_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let scenario = scenarios().join("model_a.toml");
    for dir in [&a, &b] {
        assert!(
            rydgate(&["gate", "run", scenario.to_str().unwrap()], dir.path())
                .status
                .success()
        );
    }
    for f in ["gate_report.txt", "traces.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn single_value_sweep_matches_run() {
    let (run_dir, sweep_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let scenario = scenarios().join("model_b.toml");
    let s = scenario.to_str().unwrap();
    assert!(rydgate(&["gate", "run", s], run_dir.path())
        .status
        .success());
    let o = rydgate(
        &["sweep", s, "--knob", "u_mhz", "--values", "1800"],
        sweep_dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let report = std::fs::read_to_string(run_dir.path().join("gate_report.txt")).unwrap();
    let phi: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("entanglement_phase = "))
        .unwrap()
        .parse()
        .unwrap();
    let csv = std::fs::read_to_string(sweep_dir.path().join("sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "OK");
    let swept: f64 = row[3].parse().unwrap();
    assert!(
        (swept - phi).abs() <= 1e-12 * phi.abs().max(1.0),
        "{swept} vs {phi}"
    );
}

#[test]
fn sweep_keeps_going_past_failing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("model_b.toml");
    let o = rydgate(
        &[
            "sweep",
            scenario.to_str().unwrap(),
            "--knob",
            "gamma_mhz",
            "--values",
            "0.1,-1,0.2",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let status: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(status, ["OK", "FAILED", "OK"]);
}

#[test]
fn concurrent_writer_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(".rydgate.lock"), "").unwrap();
    let scenario = scenarios().join("model_a.toml");
    let o = rydgate(&["gate", "run", scenario.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
}
