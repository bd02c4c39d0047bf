use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn anomalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anomalab"))
        .args(args)
        .env_remove("ANOMALAB_QUAD_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn identity_line() {
    let o = anomalab(&["identities", "--check", "u0sq"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "u0^2 == -u0' : EXACT PASS\n");
}

#[test]
fn speed_family_passes_assertions() {
    let o = anomalab(&["identities", "--check", "speed-family", "--count", "5", "--assert"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn fourier_convolution() {
    let o = anomalab(&["fourier", "--k", "3", "--conv", "1,2", "--assert"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("F[e3](ξ) = (4i·π^3)·ξ^2·H(ξ)"), "{s}");
    assert!(s.contains("EXACT PASS"));
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(code(&anomalab(&["bogus"])), 2);
    assert_eq!(code(&anomalab(&[])), 2);
    assert_eq!(code(&anomalab(&["pair", "--test", "gaussian"])), 2);
    assert_eq!(code(&anomalab(&["blowup", "--eps-sweep", "0.1:0.2:geometric"])), 2);
    assert_eq!(code(&anomalab(&["pseudofun", "--plot"])), 2);
    assert_eq!(code(&anomalab(&["pseudofun", "--format", "xml"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"subcommand": "wave", "params": {"epsilon": 0.5}}"#).unwrap();
    let o = anomalab(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
    assert_eq!(code(&anomalab(&["--config", cfg.to_str().unwrap(), "pseudofun"])), 2);
}

#[test]
fn config_file_runs_like_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"subcommand": "identities", "params": {"check": "u0cube"}, "output": {"format": "json"}}"#,
    )
    .unwrap();
    let a = anomalab(&["--config", cfg.to_str().unwrap()]);
    let b = anomalab(&["identities", "--check", "u0cube", "--format", "json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["command"], "identities");
    assert_eq!(doc["params"]["check"], "u0cube");
    assert_eq!(doc["checks"][0]["pass"], true);
}

#[test]
fn blowup_files_include_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = anomalab(&["blowup", "--eps-sweep", "0.1:0.025:geometric", "--out", out, "--plot", "--assert"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("blowup.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eps,t_measured,t_pred,ratio,location,fitted_slope"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    let slope: f64 = rows[0].rsplit(',').next().unwrap().parse().unwrap();
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
    let doc = read_json(&dir.path().join("blowup.json"));
    assert_eq!(doc["result"]["slope"]["slope"].as_f64(), Some(slope));
    assert!(std::fs::read_to_string(dir.path().join("blowup.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn forecast_lines_json() {
    let o = anomalab(&[
        "forecast", "--speeds", "0,1,-1", "--seeds", "-1,1", "--depth", "2", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let gens = doc["result"]["generations"].as_array().unwrap();
    assert_eq!(gens.iter().map(|g| g.as_array().unwrap().len()).collect::<Vec<_>>(), [6, 3, 0]);
    let line = gens[1]
        .as_array()
        .unwrap()
        .iter()
        .find(|l| l["x0"] == "0/1")
        .expect("line born at the origin crossing");
    assert_eq!(line["t0"], "1/1");
    assert_eq!(line["speed"], "0/1");
}

#[test]
fn output_is_deterministic() {
    let args = ["pair", "--mode", "trichotomy", "--eps-sweep", "0.1:0.0125:geometric", "--format", "json"];
    let a = anomalab(&args);
    let b = anomalab(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let csv = ["blowup", "--eps-sweep", "0.1:0.05:geometric", "--format", "csv"];
    assert_eq!(anomalab(&csv).stdout, anomalab(&csv).stdout);
}

#[test]
fn failing_assertions_exit_4() {
    let o = anomalab(&["wave", "--assert"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sup deviation"));
    // Without --assert the same run succeeds and reports the miss in its checks.
    let o = anomalab(&["wave", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["checks"][0]["pass"], false);
}

#[test]
fn numerical_failures_exit_3() {
    let o = Command::new(env!("CARGO_BIN_EXE_anomalab"))
        .args(["pair"])
        .env("ANOMALAB_QUAD_TOL", "1e-300")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_anomalab"))
        .args(["pair"])
        .env("ANOMALAB_QUAD_TOL", "tight")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(code(&anomalab(&["wave", "--g=-1:0:3", "--amplitude", "50"])), 3);
}

#[test]
fn golden_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("g.json");
    let g = golden.to_str().unwrap();
    let args = ["pair", "--mode", "exact", "--analytic-eps", "0.01"];
    let w = anomalab(&[&args[..], &["--write-golden", g]].concat());
    assert_eq!(code(&w), 0);
    assert_eq!(code(&anomalab(&[&args[..], &["--golden", g]].concat())), 0);

    let mut doc = read_json(&golden);
    let exact = doc["result"]["exact"][0].as_f64().unwrap();
    assert!((exact + 3.525659091209).abs() < 1e-11);
    doc["result"]["exact"][0] = Value::from(exact * (1.0 + 1e-6));
    std::fs::write(&golden, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = anomalab(&[&args[..], &["--golden", g]].concat());
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("result.exact[0]"));
    assert_eq!(code(&anomalab(&[&args[..], &["--golden", g, "--golden-rtol", "1e-5"]].concat())), 0);
}

#[test]
fn report_subset() {
    let o = anomalab(&["report", "--only", "1,2,5"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("criterion 1 PASS"), "{s}");
    assert!(s.contains("criterion 5 PASS"));
    assert!(s.contains("3/3 criteria pass"));
    assert_eq!(code(&anomalab(&["report", "--only", "12"])), 2);
}
