use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn skewlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn uniform(map: &str) -> String {
    format!(r#"{{"base": {{"kind": "circle", "omega": 0.3}}, "fiber": {{"kind": "uniform", "map": {map}}}, "endpoint": 1.0}}"#)
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn certify_logistic_and_zero_map() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "l.json", &uniform(r#"{"kind": "logistic-scaled", "k": 1.0}"#));
    let o = skewlab(&["certify", &cfg, "--grid", "10000"]);
    assert!(o.status.success());
    let alpha = json(&o)["certificate"]["alpha_star"].as_f64().unwrap();
    assert!((alpha - 1.0).abs() < 1e-3);

    let cfg = write_config(&dir, "z.json", &uniform(r#"{"kind": "poly", "coeffs": [0.0]}"#));
    let o = skewlab(&["certify", &cfg]);
    assert!(o.status.success());
    let c = &json(&o)["certificate"];
    assert_eq!(c["alpha_star"].as_f64(), Some(0.0));
    assert_eq!(c["gamma"].as_f64(), Some(0.0));
}

#[test]
fn malformed_config_exits_2_with_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", r#"{"base": {"kind": "circle", "omega": 0.3}, "fiber": {"kind": "uniform"}, "endpoint": 1}"#);
    let o = skewlab(&["certify", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fiber") && err.contains("line 1"), "{err}");

    let cfg = write_config(&dir, "range.json", &uniform(r#"{"kind": "logistic-scaled", "k": 3.0}"#));
    assert_eq!(skewlab(&["certify", &cfg]).status.code(), Some(2));
    assert_eq!(skewlab(&["certify", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn orbit_pair_kappa_decreases() {
    let o = skewlab(&["orbit-pair", "@noinvattr", "--theta", "0", "--x0", "0.2", "--y0", "0.8", "--steps", "50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("n,x,y,kappa,ratio,bound,b\n"));
    assert!(!text.contains('\r'));
    let kappas: Vec<f64> = csv_rows(&text).iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(kappas.windows(2).all(|w| w[1] < w[0]), "{kappas:?}");
}

#[test]
fn orbit_pair_edge_cases() {
    let o = skewlab(&["orbit-pair", "@noinvattr", "--theta", "0", "--x0", "0.4", "--y0", "0.4", "--steps", "10"]);
    assert!(o.status.success());
    assert_eq!(csv_rows(&stdout(&o)).len(), 1);
    let o = skewlab(&["orbit-pair", "@noinvattr", "--theta", "0", "--x0", "0.2", "--y0", "0.4", "--steps", "0"]);
    assert_eq!(stdout(&o), "n,x,y,kappa,ratio,bound,b\n");
    let o = skewlab(&["orbit-pair", "@noinvattr", "--theta", "0.3", "--x0", "0.2", "--y0", "0.4"]);
    assert_eq!(o.status.code(), Some(2), "unknown base point");
    let o = skewlab(&["orbit-pair", "@coinflip-two", "--theta", "(0).(1)", "--x0", "0.2", "--y0", "0.4"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn pullback_noinvattr_reports_theta0() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("phi.csv");
    let o = skewlab(&["pullback", "@noinvattr", "--depth", "30", "--stop", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let r = json(&o);
    assert!(r["phi_at_theta0"].as_f64().unwrap() <= 0.5f64.powi(30));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("key,value\n"));
}

#[test]
fn pullback_keller_is_positive_and_reingestible() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("phi.csv");
    let o = skewlab(&["pullback", "@keller", "--grid", "512", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let frac = json(&o)["summary"]["positive_fraction"].as_f64().unwrap();
    assert!(frac > 0.95);
    let o = skewlab(&["verify", "@keller", "--phi", out.to_str().unwrap(), "--samples", "16", "--steps", "40", "--tol", "1e-2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["attractor"]["records"].as_array().unwrap().len(), 16);
    assert!(v["grid_modulus"].as_f64().is_some());
}

#[test]
fn pullback_needs_invertible_base() {
    let o = skewlab(&["pullback", "@coinflip-one"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not invertible"));
}

#[test]
fn shift_pullback_table_reingests() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("coin.csv");
    let o = skewlab(&["pullback", "@coinflip-two", "--grid", "8", "--depth", "5", "--horizon", "30", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = skewlab(&["verify", "@coinflip-two", "--phi", out.to_str().unwrap(), "--steps", "20", "--tol", "1e-12"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["attractor"]["attracting"], Value::Bool(true));
}

#[test]
fn verify_rejects_graph_outside_range() {
    let dir = TempDir::new().unwrap();
    let phi = dir.path().join("phi.csv");
    std::fs::write(&phi, "theta,value\n0.0,0.5\n0.5,1.5\n").unwrap();
    let o = skewlab(&["verify", "@keller", "--phi", phi.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn catalog_config_roundtrips() {
    let dir = TempDir::new().unwrap();
    for name in ["noinvattr", "coinflip-one", "coinflip-two", "keller", "product-hump"] {
        let o = skewlab(&["catalog", name]);
        assert!(o.status.success());
        let text = stdout(&o);
        let first: skewlab::SystemConfig = skewlab::SystemConfig::from_json(&text).unwrap();
        let again = skewlab::SystemConfig::from_json(&first.to_json()).unwrap();
        assert_eq!(first, again);
        let path = write_config(&dir, &format!("{name}.json"), &text);
        assert!(Path::new(&path).exists());
        let o = skewlab(&["certify", &path]);
        let expected = if name.starts_with("coinflip") { 5 } else { 0 };
        assert_eq!(o.status.code(), Some(expected), "{name}");
    }
}

#[test]
fn demos_pass() {
    for name in ["noinvattr", "coinflip-one", "coinflip-two", "keller", "product-hump"] {
        let o = skewlab(&["demo", name]);
        assert!(o.status.success(), "{name}: {}", stdout(&o));
        let text = stdout(&o);
        assert!(text.contains("[PASS]") && !text.contains("[FAIL]"), "{text}");
    }
    assert_eq!(skewlab(&["demo", "nope"]).status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_skewlab"))
            .args(["pullback", "@keller", "--grid", "64"])
            .env("SKEWLAB_THREADS", v)
            .output()
            .unwrap()
    };
    assert!(run("2").status.success());
    assert_eq!(run("zero").status.code(), Some(2));
    assert_eq!(run("0").status.code(), Some(2));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_skewlab"))
            .args(["pullback", "@keller", "--grid", "256"])
            .env("SKEWLAB_THREADS", v)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}
