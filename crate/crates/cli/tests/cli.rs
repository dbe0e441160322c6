use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = r#"{"H": 0.12, "D": 0.06, "w": 0.008, "t": 0.004, "N_h": 3,
  "material": {"preset": "small-module-fit"}}"#;
const ARM: &str = r#"{"H": 0.06, "D": 0.06, "w": 0.008, "t": 0.004, "N_h": 3, "modules": 3,
  "plate": {"h_p": 0.0075, "D_p": 0.06}, "tendon_radius": 0.025, "base_rotation": true}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_trimhelix"));
    c.env("SOURCE_DATE_EPOCH", "1700000000");
    c
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn version_names_schema() {
    let o = run(&["--version"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("(schema 1)"));
}

#[test]
fn analyze_small_module() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    let v = json(&run(&["analyze", s(&spec)]));
    assert_eq!(v["schema_version"], 1);
    let k = v["result"]["stiffness"]["k_ax"].as_f64().unwrap();
    assert!((k - 99.0).abs() < 0.1);
    assert_eq!(v["result"]["material"]["youngs_modulus"], 2.0e6);
    let presets = v["result"]["presets"].as_array().unwrap();
    assert!(presets.iter().all(|p| p["youngs_modulus_pa"].is_number()));
}

#[test]
fn analyze_is_deterministic_and_units_convert() {
    let d = TempDir::new().unwrap();
    let m = write(&d, "m.json", SMALL);
    let mm = write(
        &d,
        "mm.json",
        r#"{"H": 120, "D": 60, "w": 8, "t": 4, "N_h": 3, "units": "mm", "material": {"preset": "small-module-fit"}}"#,
    );
    let a = run(&["analyze", s(&m)]);
    let b = run(&["analyze", s(&m)]);
    assert_eq!(a.stdout, b.stdout);
    let (va, vb) = (json(&a), json(&run(&["analyze", s(&mm)])));
    let (ka, kb) = (
        va["result"]["stiffness"]["k_ax"].as_f64().unwrap(),
        vb["result"]["stiffness"]["k_ax"].as_f64().unwrap(),
    );
    assert!((ka / kb - 1.0).abs() < 1e-12);
}

#[test]
fn missing_key_is_named() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", r#"{"H": 0.12, "D": 0.06, "w": 0.008, "N_h": 3}"#);
    let o = run(&["analyze", s(&spec)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`t`"));
}

#[test]
fn wrong_type_names_key() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", r#"{"H": 0.12, "D": 0.06, "w": "wide", "t": 0.004, "N_h": 3}"#);
    let o = run(&["analyze", s(&spec)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"w\""));
}

#[test]
fn invariant_violations_exit_2() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", r#"{"H": 0.01, "D": 0.06, "w": 0.04, "t": 0.004, "N_h": 3}"#);
    let o = run(&["analyze", s(&spec)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("w < D/2") && err.contains("t*N_h < H"), "{err}");
}

#[test]
fn strict_fails_on_limits() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", r#"{"H": 0.17, "D": 0.08, "w": 0.012, "t": 0.005, "N_h": 4}"#);
    assert_eq!(run(&["analyze", s(&spec)]).status.code(), Some(0));
    let o = run(&["analyze", "--strict", s(&spec)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps_max"));
}

#[test]
fn text_report_mirrors_json() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    let v = json(&run(&["analyze", s(&spec)]));
    let t = String::from_utf8(run(&["analyze", "--format", "text", s(&spec)]).stdout).unwrap();
    let k = v["result"]["stiffness"]["k_ax"].to_string();
    assert!(t.contains(&format!("result.stiffness.k_ax = {k}")));
}

#[test]
fn sweep_helices_increasing() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    let o = run(&["sweep", s(&spec), "--param", "N_h", "--values", "3,4,5"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let k: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(k.len(), 3);
    assert!(k[0] < k[1] && k[1] < k[2]);
}

#[test]
fn sweep_oracle_adds_two_columns() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    let plain = String::from_utf8(run(&["sweep", s(&spec), "--param", "t", "--values", "0.003,0.004"]).stdout).unwrap();
    let with = String::from_utf8(
        run(&["sweep", s(&spec), "--param", "t", "--values", "0.003,0.004", "--oracle", "--elems", "4"]).stdout,
    )
    .unwrap();
    for (a, b) in plain.lines().zip(with.lines()) {
        assert!(b.starts_with(a));
        assert_eq!(b.split(',').count(), a.split(',').count() + 2);
    }
}

#[test]
fn sweep_zero_step_is_usage_error() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    assert_eq!(run(&["sweep", s(&spec), "--param", "H", "--range", "0.1:0.2:0"]).status.code(), Some(2));
}

#[test]
fn sweep_bad_rows_are_kept() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    let o = run(&["sweep", s(&spec), "--param", "N_h", "--values", "3,2.5"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().last().unwrap().starts_with("N_h,2.5,"));
}

#[test]
fn oracle_reports_ratio_and_strut_check() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    let v = json(&run(&["oracle", s(&spec), "--elems", "8"]));
    let r = &v["result"];
    let ratio = r["ratio"].as_f64().unwrap();
    assert!((ratio - r["k_oracle"].as_f64().unwrap() / r["k_analytical"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(r["strut_check"]["within_half_percent"], true);
    assert_eq!(run(&["oracle", s(&spec), "--mode", "twist"]).status.code(), Some(2));
}

#[test]
fn mesh_is_deterministic_with_sidecar() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", SMALL);
    let (a, b) = (d.path().join("a.stl"), d.path().join("b.stl"));
    let v = json(&run(&["mesh", s(&spec), "--out", s(&a)]));
    json(&run(&["mesh", s(&spec), "--out", s(&b)]));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta = &v["result"]["metadata"];
    let ratio = meta["volume_m3"].as_f64().unwrap() / meta["estimated_volume_m3"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.1);
    let side: Value = serde_json::from_slice(&std::fs::read(d.path().join("a.stl.manifest.json")).unwrap()).unwrap();
    assert_eq!(side["manifest"]["id"], v["manifest"]["id"]);
    assert_eq!(run(&["mesh", s(&spec), "--out", s(&a), "--resolution", "4"]).status.code(), Some(2));
}

#[test]
fn mesh_overlap_exits_3() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", r#"{"H": 0.01, "D": 0.06, "w": 0.008, "t": 0.007, "N_h": 1}"#);
    assert_eq!(run(&["mesh", s(&spec), "--out", s(&d.path().join("x.stl"))]).status.code(), Some(3));
}

#[test]
fn robot_straight_height() {
    let d = TempDir::new().unwrap();
    let arm = write(&d, "arm.json", ARM);
    let v = json(&run(&["robot", s(&arm), "fk", "--straight"]));
    let z = v["result"]["tip"]["position"][2].as_f64().unwrap();
    assert!((z - 0.45).abs() <= 0.05);
}

#[test]
fn robot_cables_estimate_fk_round_trip() {
    let d = TempDir::new().unwrap();
    let arm = write(&d, "arm.json", ARM);
    let cfg = r#"{"segments": [{"delta_l": -0.004, "theta": 0.5, "phi": 0.7},
        {"delta_l": -0.01, "theta": 0.2, "phi": -2.0}, {"delta_l": 0.0, "theta": 0.1, "phi": 3.0}]}"#;
    let cables = json(&run_stdin(&["robot", s(&arm), "cables"], cfg));
    let lengths = cables["result"]["lengths"].to_string();
    let est = json(&run_stdin(&["robot", s(&arm), "estimate"], &lengths));
    let cfg2 = est["result"]["config"].to_string();
    let fk1 = json(&run_stdin(&["robot", s(&arm), "fk"], cfg));
    let fk2 = json(&run_stdin(&["robot", s(&arm), "fk"], &cfg2));
    for i in 0..3 {
        let a = fk1["result"]["tip"]["position"][i].as_f64().unwrap();
        let b = fk2["result"]["tip"]["position"][i].as_f64().unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn robot_infeasible_config_exits_4() {
    let d = TempDir::new().unwrap();
    let arm = write(&d, "arm.json", ARM);
    let cfg = r#"{"segments": [{"delta_l": -0.5, "theta": 0.0, "phi": 0.0},
        {"delta_l": 0.0, "theta": 0.0, "phi": 0.0}, {"delta_l": 0.0, "theta": 0.0, "phi": 0.0}]}"#;
    let o = run_stdin(&["robot", s(&arm), "fk"], cfg);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta_L"));
}

#[test]
fn robot_workspace_rows_in_sphere() {
    let d = TempDir::new().unwrap();
    let arm = write(&d, "arm.json", ARM);
    let out = d.path().join("ws.csv");
    assert!(run(&["robot", s(&arm), "workspace", "--n", "10000", "--out", s(&out)]).status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,z"));
    assert_eq!(csv.lines().count(), 10_001);
    for l in csv.lines().skip(1) {
        let r: f64 = l.split(',').map(|v| v.parse::<f64>().unwrap().powi(2)).sum::<f64>().sqrt();
        assert!(r <= 0.45 + 1e-12);
    }
    let side: Value = serde_json::from_slice(&std::fs::read(d.path().join("ws.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(side["manifest"]["resolved"]["seed"], 0);
}

#[test]
fn robot_payload_linear() {
    let d = TempDir::new().unwrap();
    let arm = write(&d, "arm.json", ARM);
    let dz = |f: &str| {
        json(&run(&["robot", s(&arm), "payload", "--straight", "--force", f]))["result"]["tip_displacement"][2]
            .as_f64()
            .unwrap()
    };
    let (a, b) = (dz("0,0,-1"), dz("0,0,-2"));
    assert!(a < 0.0 && (b / a - 2.0).abs() < 1e-9);
}

#[test]
fn optimize_recovers_small_module() {
    let d = TempDir::new().unwrap();
    let targets = write(
        &d,
        "t.json",
        r#"{"schema_version": 1, "material": {"preset": "small-module-fit"},
            "k_ax": {"target": 99.0, "band": 0.01}, "k_bend": {"target": 0.0326, "band": 0.01},
            "bounds": {"H": [0.08, 0.16], "D": [0.04, 0.08], "w": [0.005, 0.012], "t": [0.003, 0.006], "N_h": [2, 3, 4]}}"#,
    );
    let trace = d.path().join("trace.csv");
    let v = json(&run(&["optimize", "--targets", s(&targets), "--budget", "600", "--trace", s(&trace)]));
    assert_eq!(v["result"]["status"], "targets_met");
    let k = v["result"]["design"]["achieved"]["k_ax"].as_f64().unwrap();
    assert!((k / 99.0 - 1.0).abs() < 0.02);
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("evaluation,objective"));
}

#[test]
fn optimize_unreachable_exits_3_with_nearest() {
    let d = TempDir::new().unwrap();
    let targets = write(
        &d,
        "t.json",
        r#"{"k_ax": {"target": 1e9, "band": 0.01},
            "bounds": {"H": [0.08, 0.16], "D": [0.04, 0.08], "w": [0.005, 0.012], "t": [0.003, 0.006], "N_h": [2, 3]}}"#,
    );
    let o = run(&["optimize", "--targets", s(&targets), "--budget", "100"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["status"], "no_feasible_design");
    assert!(v["result"]["design"]["best_spec"]["H"].is_number());
}
