use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn cayley(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayley"))
        .args(args)
        .env_remove("CAYLEY_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn json_of(args: &[&str]) -> Value {
    let out = cayley(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cayley-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Data lines of a CSV artifact, without the `#` manifest lines.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn phase_ferromagnet_has_two_ground_states() {
    let v = json_of(&["phase", "--j1", "-1", "--j2", "0"]);
    assert_eq!(v["regions"], serde_json::json!(["A1"]));
    assert_eq!(v["ground_classes"], serde_json::json!(["C1"]));
    assert_eq!(v["ground_states"].as_array().unwrap().len(), 2);
    assert_eq!(v["infinite"], Value::Bool(false));
    // U = (−1.5, −0.5, 1.5, 0.5): gap 1, λ = 1/21.
    assert_eq!(v["epsilon"].as_f64().unwrap(), 1.0);
    assert!((v["lambda"].as_f64().unwrap() - 1.0 / 21.0).abs() < 1e-15);
    assert_eq!(v["manifest"]["command"], "phase");
}

#[test]
fn phase_counts_per_region() {
    for (j1, j2, count) in [("-1", "0", 2), ("1", "0.5", 6), ("1", "0", 2), ("-1", "0.5", 6)] {
        let v = json_of(&["phase", "--j1", j1, "--j2", j2]);
        assert_eq!(v["ground_states"].as_array().unwrap().len(), count, "J = ({j1}, {j2})");
    }
}

#[test]
fn contours_of_single_minus_root() {
    let cfg = scratch("single_minus.cfg");
    std::fs::write(&cfg, "radius 2\nboundary plus\ne -1\n").unwrap();
    let v = json_of(&["contours", "--n", "2", "--input", cfg.to_str().unwrap()]);
    assert_eq!(v["m"], 1);
    assert_eq!(v["total_boundary"], 3);
    assert_eq!(v["contours"][0]["interior"], serde_json::json!(["e"]));
    assert_eq!(v["contours"][0]["boundary"], serde_json::json!(["1", "2", "3"]));
    // 21 edges in V_3, three of them broken: −(21 − 2·3) = −15.
    let check = &v["energy_identity_check"];
    assert_eq!(check["direct"].as_f64().unwrap(), -15.0);
    assert_eq!(check["via_contours"].as_f64().unwrap(), -15.0);
}

#[test]
fn contours_radius_mismatch_is_a_validation_error() {
    let cfg = scratch("radius_two.cfg");
    std::fs::write(&cfg, "radius 2\nboundary plus\n").unwrap();
    let out = cayley(&["contours", "--n", "3", "--input", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exact_enumeration_matches_recursion() {
    let base = ["exact", "--n", "2", "--beta", "1", "--j1", "-1", "--j2", "0", "--boundary", "plus", "--method"];
    let e = json_of(&[&base[..], &["enum"]].concat());
    let d = json_of(&[&base[..], &["dp"]].concat());
    assert!((e["log_z"].as_f64().unwrap() - d["log_z"].as_f64().unwrap()).abs() < 1e-12);
    let (me, md) = (e["marginals"].as_object().unwrap(), d["marginals"].as_object().unwrap());
    assert_eq!(me.len(), 10);
    let keys: Vec<&str> = me.keys().map(String::as_str).collect();
    assert_eq!(keys, ["e", "1", "2", "3", "12", "13", "21", "23", "31", "32"]);
    for (k, x) in me {
        assert!((x.as_f64().unwrap() - md[k].as_f64().unwrap()).abs() < 1e-12, "vertex {k}");
    }
}

#[test]
fn exact_competing_model_routes_agree() {
    let base = ["exact", "--n", "2", "--beta", "0.7", "--j1", "0.5", "--j2", "-0.8", "--boundary", "minus", "--method"];
    let e = json_of(&[&base[..], &["enum"]].concat());
    let d = json_of(&[&base[..], &["dp"]].concat());
    assert!((e["log_z"].as_f64().unwrap() - d["log_z"].as_f64().unwrap()).abs() < 1e-12);
    for (k, x) in e["marginals"].as_object().unwrap() {
        assert!((x.as_f64().unwrap() - d["marginals"][k].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn exact_zero_radius_closed_form() {
    // One free spin with three plus neighbors: P(−) = 1/(1 + e^{6β}).
    let v = json_of(&["exact", "--n", "0", "--beta", "0.5", "--method", "enum"]);
    let p = v["marginals"]["e"].as_f64().unwrap();
    let expected = 1.0 / (1.0 + (3.0f64).exp());
    assert!((p - expected).abs() < 1e-15);
}

#[test]
fn unknown_subcommand_and_flag_exit_one_with_usage() {
    for args in [&["bogus"][..], &["phase", "--j1", "1", "--j2", "0", "--bogus"][..], &["phase"][..]] {
        let out = cayley(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
}

#[test]
fn help_exits_zero() {
    let out = cayley(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("twophase"));
}

#[test]
fn invalid_parameters_exit_one() {
    assert_eq!(cayley(&["exact", "--n", "2", "--beta", "-1"]).status.code(), Some(1));
    assert_eq!(cayley(&["sample", "--n", "2", "--beta", "1", "--sweeps", "5", "--burnin", "9"]).status.code(), Some(1));
    assert_eq!(cayley(&["sample", "--n", "2", "--beta", "1", "--sweeps", "5", "--observable", "energy"]).status.code(), Some(1));
    assert_eq!(cayley(&["peierls", "--j1", "0", "--j2", "1"]).status.code(), Some(1));
    assert_eq!(cayley(&["report", "--criteria", "14"]).status.code(), Some(1));
}

#[test]
fn capacity_errors_exit_two() {
    let out = cayley(&["exact", "--n", "30", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cayley(&["exact", "--n", "4", "--beta", "1", "--method", "enum"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn formats_without_csv_form_are_rejected() {
    let out = cayley(&["phase", "--j1", "1", "--j2", "0", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
}

/// `P(σ ≡ + on V_1)` for the plus-boundary Ising model on `V_n`, from the
/// cavity field acting on each depth-one vertex.
fn window_agreement(beta: f64, n: usize) -> f64 {
    let u = |h: f64| (beta.tanh() * h.tanh()).atanh();
    let mut h = 2.0 * beta;
    for _ in 1..n {
        h = 2.0 * u(h);
    }
    let leaf = |s0: f64| (beta * s0 + h).exp() + (-beta * s0 - h).exp();
    let z = leaf(1.0).powi(3) + leaf(-1.0).powi(3);
    (3.0 * (beta + h)).exp() / z
}

#[test]
fn deviation_csv_matches_cavity_oracle() {
    let out = cayley(&["deviation", "--beta-grid", "0.8,1.2,1.6,2.0", "--window", "1", "--n", "8"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["beta", "prob"]);
    let probs: Vec<(f64, f64)> = rows[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(probs.len(), 4);
    for w in probs.windows(2) {
        assert!(w[1].1 < w[0].1);
    }
    for &(beta, p) in &probs {
        let expected = 1.0 - window_agreement(beta, 8);
        assert!((p - expected).abs() < 1e-12, "β = {beta}: {p} vs {expected}");
    }
    assert!(probs[3].1 < 1e-2);
}

#[test]
fn sample_trace_columns_and_checksum() {
    let out = cayley(&["sample", "--n", "3", "--beta", "1", "--sweeps", "200", "--burnin", "50", "--seed", "9"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["sweep", "observable", "running_mean"]);
    assert_eq!(rows.len() - 1, 150);
    let mut sum = 0.0;
    for (k, r) in rows[1..].iter().enumerate() {
        let v: f64 = r[1].parse().unwrap();
        assert!(v == 1.0 || v == -1.0);
        sum += v;
        let running: f64 = r[2].parse().unwrap();
        assert!((running - sum / (k + 1) as f64).abs() < 1e-15);
    }
    let digest = hex::encode(Sha256::digest(body.as_bytes()));
    assert!(text.contains(&format!("# sha256: {digest}")));
    assert!(text.contains("# seeds: [9]"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["twophase", "--n", "3", "--beta", "1.2", "--sweeps", "500", "--seed", "11"];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_cayley"))
            .args(args)
            .env("SOURCE_DATE_EPOCH", "0")
            .output()
            .unwrap()
            .stdout
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    for key in ["plus", "minus", "gap", "dp_plus", "dp_minus"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["manifest"]["seeds"], serde_json::json!([11, 12]));
    assert_eq!(v["manifest"]["timestamp"], 0);
}

#[test]
fn golden_files_bless_compare_and_detect_drift() {
    let golden = scratch("phase.golden.json");
    let _ = std::fs::remove_file(&golden);
    let g = golden.to_str().unwrap();
    let base = ["phase", "--j1", "2", "--j2", "1", "--golden", g];
    assert!(cayley(&[&base[..], &["--bless"]].concat()).status.success());
    assert!(cayley(&base).status.success());
    let stored = std::fs::read_to_string(&golden).unwrap();
    std::fs::write(&golden, stored.replace("\"infinite\": false", "\"infinite\": true")).unwrap();
    assert_eq!(cayley(&base).status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("bounds.csv");
    let out = cayley(&["bounds", "--n", "1", "--beta", "0.5", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows[0], ["interior", "size", "p", "bound", "ok"]);
    assert!(rows[1..].iter().all(|r| r[4] == "true"));
    // Connected subsets of V_1: the root set, 3 leaves, 3 root-leaf pairs,
    // 3 root-two-leaf triples and the whole ball.
    assert_eq!(rows.len() - 1, 11);
}

#[test]
fn worker_variable_is_validated() {
    let run = |w: &str| {
        Command::new(env!("CARGO_BIN_EXE_cayley"))
            .args(["phase", "--j1", "1", "--j2", "0"])
            .env("CAYLEY_WORKERS", w)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("2"), Some(0));
    assert_eq!(run("0"), Some(1));
    assert_eq!(run("many"), Some(1));
}

#[test]
fn ground_reports_layers_on_degenerate_line() {
    let v = json_of(&["ground", "--j1", "0", "--j2", "1", "--n", "4"]);
    assert_eq!(v["infinite"], Value::Bool(true));
    let layered = v["layered"].as_array().unwrap();
    assert_eq!(layered.len(), 4);
    assert!(layered.iter().all(|l| l["valid"] == Value::Bool(true)));
    assert!(v["states"].as_array().unwrap().iter().all(|s| s["minimal"] == Value::Bool(true)));
}

#[test]
fn peierls_has_no_violations() {
    let v = json_of(&["peierls", "--j1", "-1", "--j2", "1", "--samples", "300", "--seed", "5"]);
    assert_eq!(v["violations"], 0);
    assert!(v["ground_states"].as_array().unwrap().iter().all(|s| s["min_margin"].as_f64().unwrap() >= -1e-9));
}

#[test]
fn report_runs_selected_criteria() {
    let v = json_of(&["report", "--criteria", "1,2"]);
    let reports = v["criteria"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(v["passed"], 2);
    assert!(reports.iter().all(|r| r["pass"] == Value::Bool(true) && r["table"]["rows"].is_array()));
}
