use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qcmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcmt"))
        .args(args)
        .env_remove("QCMT_LOG")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_verify_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = qcmt(&["verify", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["mode"], "verify");
    assert_eq!(r["passed"], true);
    assert_eq!(r["seed"], 0);
    let checks = r["checks"].as_array().unwrap();
    assert!(checks.len() >= 7);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(checks.iter().all(|c| c["worst_residual"].is_number()));
    assert!(r["config"].is_object());
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(code(&qcmt(&["verify", "--seed", "5", "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&qcmt(&["verify", "--seed", "5", "--out", b.to_str().unwrap()])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    assert_eq!(code(&qcmt(&["verify", "--seed", "6", "--out", c.to_str().unwrap()])), 0);
    assert_eq!(report(&c)["seed"], 6);
}

#[test]
fn non_psd_kernel_fails_gram_check() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "bad.json",
        r#"{"kernel": {"type": "explicit", "matrix": [[1, 2], [2, 1]]}}"#,
    );
    let o = qcmt(&["verify", "--config", &cfg]);
    assert_eq!(code(&o), 1);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let gram = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "gram_psd")
        .unwrap();
    assert_eq!(gram["passed"], false);
    assert!(gram["worst_residual"].as_f64().unwrap() > gram["threshold"].as_f64().unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let unknown = write(
        &dir,
        "unknown.json",
        r#"{"kernal": {"type": "gibbs_oscillator", "mass": 1, "frequency": 1, "kt": 1}}"#,
    );
    let o = qcmt(&["verify", "--config", &unknown]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernal"));

    let mismatch = write(&dir, "mismatch.json", r#"{"mode": "gram"}"#);
    assert_eq!(code(&qcmt(&["verify", "--config", &mismatch])), 2);

    let no_words = write(&dir, "nowords.json", r#"{}"#);
    assert_eq!(code(&qcmt(&["moments", "--config", &no_words])), 2);

    let missing = dir.path().join("absent.json");
    assert_eq!(code(&qcmt(&["verify", "--config", missing.to_str().unwrap()])), 2);

    let garbage = write(&dir, "garbage.json", "{ not json");
    assert_eq!(code(&qcmt(&["gram", "--config", &garbage])), 2);

    let bad_field = write(
        &dir,
        "field.json",
        r#"{"kernel": {"type": "field", "mass": -1}, "packets": [{"name": "f", "center": [0, 0], "sigma": 1}]}"#,
    );
    assert_eq!(code(&qcmt(&["verify", "--config", &bad_field])), 2);
}

#[test]
fn moments_table_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "m.json",
        r#"{"kernel": {"type": "explicit", "matrix": [[1, 0.5], [0.5, 1]]},
            "words": ["M1*M2", "M1", "M1*M2*M1*M2", "V*M1*M2*V", "M1*V*M2"]}"#,
    );
    let o = qcmt(&["moments", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "word,re,im");
    assert_eq!(rows[1], "M1*M2,0.5,0");
    assert_eq!(rows[2], "M1,0,0");
    assert_eq!(rows[3], "M1*M2*M1*M2,1.5,0");
    assert_eq!(rows[4], "V*M1*M2*V,0.5,0");
    assert_eq!(rows[5], "M1*V*M2,0,0");

    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.records().count(), 5);
}

#[test]
fn over_cap_word_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let long = vec!["M1"; 14].join("*");
    let cfg = write(
        &dir,
        "long.json",
        &format!(
            r#"{{"kernel": {{"type": "explicit", "matrix": [[1, 0.5], [0.5, 1]]}}, "words": ["M1*M1", "{long}"]}}"#
        ),
    );
    let out = dir.path().join("t.csv");
    let o = qcmt(&["moments", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[1], "M1*M1,1,0");
    assert_eq!(rows[2], format!("{long},error,error"));
}

#[test]
fn gram_reports_null_space() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "g.json",
        r#"{"kernel": {"type": "explicit", "matrix": [[1, 1], [1, 1]]}, "degree": 1}"#,
    );
    let out = dir.path().join("g.json.out");
    let o = qcmt(&["gram", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = report(&out);
    let summary = &r["data"]["summary"];
    assert_eq!(summary["dimension"], 3);
    assert!(summary["null_dimension"].as_u64().unwrap() >= 1);
    assert_eq!(summary["eigenvalues"].as_array().unwrap().len(), 3);
}

#[test]
fn gram_of_gibbs_kernel() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "g.json",
        r#"{"kernel": {"type": "gibbs_oscillator", "mass": 1, "frequency": 2, "kt": 0.5}}"#,
    );
    let o = qcmt(&["gram", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["data"]["summary"]["dimension"], 7);
}

#[test]
fn boost_scan_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "scan.json",
        r#"{"kernel": {"type": "field", "mass": 1, "beta": 1},
            "packets": [{"name": "f", "center": [0, 0], "sigma": 1}, {"name": "g", "center": [0, 1], "sigma": 1}],
            "rapidities": [0, 0.25, 0.5]}"#,
    );
    let o = qcmt(&["boost-scan", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["rapidity", "vacuum_deviation", "thermal_deviation"]
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[0], vec![0.0, 0.0, 0.0]);
    assert!(rows.iter().all(|r| r[1] <= 1e-6));
    assert!(rows[1][2] > 0.0 && rows[2][2] > rows[1][2]);
    assert!(rows[2][2] > 1e-3);

    let no_beta = write(
        &dir,
        "nobeta.json",
        r#"{"kernel": {"type": "field", "mass": 1},
            "packets": [{"name": "f", "center": [0, 0], "sigma": 1}, {"name": "g", "center": [0, 1], "sigma": 1}],
            "rapidities": [0.5]}"#,
    );
    assert_eq!(code(&qcmt(&["boost-scan", "--config", &no_beta])), 2);
}

#[test]
fn witness_mode() {
    let o = qcmt(&["witness"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["mode"], "witness");
    assert_eq!(r["passed"], true);
}

#[test]
fn field_verify_runs_microcausality_checks() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "field.json",
        r#"{"kernel": {"type": "field", "mass": 1, "beta": 1},
            "packets": [{"name": "f", "center": [0, 0], "sigma": 1}, {"name": "g", "center": [0, 1], "sigma": 1}],
            "separations": [10, 12], "trials": 20}"#,
    );
    let out = dir.path().join("r.json");
    let o = qcmt(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let names: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for want in [
        "vacuum_boost_invariance",
        "microcausality",
        "commutator_beta_independence",
    ] {
        assert!(names.contains(&want), "{names:?}");
    }
}

#[test]
fn tolerance_flag_is_echoed_and_validated() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = qcmt(&["verify", "--tolerance", "1e-9", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&out)["config"]["tolerance"], 1e-9);
    let o = qcmt(&["verify", "--tolerance", "-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn log_variable_controls_diagnostics() {
    let quiet = qcmt(&["witness"]);
    assert!(quiet.stderr.is_empty());
    let loud = Command::new(env!("CARGO_BIN_EXE_qcmt"))
        .arg("witness")
        .env("QCMT_LOG", "info")
        .output()
        .unwrap();
    assert!(!loud.stderr.is_empty());
    assert_eq!(loud.stdout, quiet.stdout);
}
