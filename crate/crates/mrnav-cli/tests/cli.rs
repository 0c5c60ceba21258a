//! End-to-end tests of the `mrnav` binary: exit codes, artifacts, and
//! override plumbing.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mrnav"))
}

fn dataset(name: &str) -> String {
    format!("{}/../../datasets/{name}.csv", env!("CARGO_MANIFEST_DIR"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn simulate_smoke_produces_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[path]\nfile = \"{}\"\n\n[output]\ndir = \"{}\"\n",
            dataset("straight"),
            out_dir.display()
        ),
    );
    let out = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("verdict: PASS"));
    for f in ["trajectory.csv", "gradients.csv", "report.json"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::json!(true));
    assert_eq!(report["completed"], serde_json::json!(true));
    assert_eq!(report["clamped_count"], serde_json::json!(0));
    assert_eq!(report["config"]["sim"]["tp_s"], serde_json::json!(0.1));
    let traj = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,x,y,z,vx,vy,vz,s,margin\n"));
    let grad = fs::read_to_string(out_dir.join("gradients.csv")).unwrap();
    assert!(grad.starts_with("t,gx,gy,gz,clamped\n"));
}

#[test]
fn tp_override_is_echoed_in_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[path]\nfile = \"{}\"\n\n[output]\ndir = \"{}\"\n",
            dataset("straight"),
            out_dir.display()
        ),
    );
    let out = bin()
        .args(["simulate", "--tp-ms", "200", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["sim"]["tp_s"], serde_json::json!(0.2));
}

#[test]
fn missing_centerline_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[path]\nfile = \"/nowhere/line.csv\"\ndefault_radius_m = 2e-3\n",
    );
    let out = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("/nowhere/line.csv"));
}

#[test]
fn invalid_field_names_itself_at_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[path]\nfile = \"{}\"\n\n[fixture]\nclearance_fraction = 0.0\n",
            dataset("straight")
        ),
    );
    let out = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("fixture.clearance_fraction"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn corridor_violation_aborts_with_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    // Start 1.5 mm off-center in a 1.6 mm corridor: the 0.3 mm sphere
    // pokes through the wall at t = 0.
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[path]\nfile = \"{}\"\n\n[sim]\ninitial_offset_m = [0.0, 1.5e-3, 0.0]\n\n[output]\ndir = \"{}\"\n",
            dataset("straight"),
            out_dir.display()
        ),
    );
    let out = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("violation"));
    // Artifacts are still written for post-mortem analysis.
    assert!(out_dir.join("report.json").is_file());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["aborted_on_violation"], serde_json::json!(true));
    assert_eq!(report["pass"], serde_json::json!(false));
}

#[test]
fn check_path_reports_requirements() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("[path]\nfile = \"{}\"\n", dataset("straight")),
    );
    let out = bin().args(["check-path", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("max curvature"));
    assert!(text.contains("required gradient"));
    assert!(text.contains("verdict: PASS"));
}

#[test]
fn check_path_fails_when_the_sphere_cannot_fit() {
    let tmp = tempfile::tempdir().unwrap();
    // 10% of a 2 mm vessel is a 0.2 mm corridor — narrower than the
    // 0.3 mm sphere.
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[path]\nfile = \"{}\"\n\n[fixture]\nclearance_fraction = 0.1\n",
            dataset("straight")
        ),
    );
    let out = bin().args(["check-path", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("narrower"), "stderr: {}", stderr_of(&out));
}

#[test]
fn flows_samples_the_selected_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("flowout");
    // No config: defaults are constant flow, 1 ml/s, 2 mm vessel.
    let out = bin()
        .args(["flows", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = fs::read_to_string(out_dir.join("flow.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,v");
    assert_eq!(lines.len(), 5002, "5 s at 1 kHz inclusive");
    let v0: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((v0 - 0.0795775).abs() / 0.0795775 <= 1e-3);
    assert!(lines[1..].iter().all(|l| l.ends_with(lines[1].split(',').nth(1).unwrap())));

    // Fast flow: five 0.5 s periods, varying values.
    let out = bin()
        .args(["flows", "--flow", "fast", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(out_dir.join("flow.csv")).unwrap();
    let vals: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 2501, "2.5 s at 1 kHz inclusive");
    let (min, max) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    assert!(max > min, "fast profile must pulse");
}

#[test]
fn unknown_flow_kind_is_rejected_by_the_parser() {
    let out = bin().args(["flows", "--flow", "turbo"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_for_simulate_is_exit_2() {
    let out = bin().arg("simulate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("--config"));
}
