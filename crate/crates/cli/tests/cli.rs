use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TOL_GOLDEN: f64 = 1e-9;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn gpcq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpcq"))
        .args(args)
        .current_dir(root().join("../../channels"))
        .output()
        .unwrap()
}

fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            (x - y).abs() <= TOL_GOLDEN * x.abs().max(1.0)
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| close(v, w)))
        }
        _ => a == b,
    }
}

/// Compares JSON stdout with `tests/golden/<name>.json`; `GPCQ_BLESS=1` rewrites it.
fn golden(name: &str, args: &[&str]) {
    let out = gpcq(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let got: Value = serde_json::from_slice(&out.stdout).unwrap();
    let path = root().join("tests/golden").join(format!("{name}.json"));
    if std::env::var_os("GPCQ_BLESS").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&got).unwrap() + "\n").unwrap();
        return;
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(close(&got, &want), "{name}: got {got:#}");
}

fn manifest(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().last().unwrap()).unwrap()
}

#[test]
fn golden_outputs() {
    golden("validate_flip", &["--json", "validate", "flip.json"]);
    golden("causal_defects", &["--json", "causal", "defects.json"]);
    golden("causal_rotating", &["--json", "causal", "rotating.json"]);
    golden("holevo_zero_plus", &["--json", "holevo", "zero-plus.json"]);
    golden("types_class_size", &["--json", "types", "--op", "class-size", "--counts", "2,2"]);
    golden("types_nearest", &["--json", "types", "--op", "nearest", "--p", "0.3,0.7", "--n", "10"]);
    golden("schur_dims", &["--json", "schur", "--d", "2", "--n", "4", "dims"]);
    golden("noncausal_xor", &["--json", "noncausal", "xor.json", "--seed", "1", "--restarts", "4"]);
    golden(
        "simulate_flip",
        &["--json", "simulate", "flip.json", "--scheme", "causal-sequential", "--rates", "0.5", "--n", "2,4", "--trials", "10", "--seed", "3"],
    );
}

#[test]
fn exit_codes() {
    assert_eq!(gpcq(&["validate", "flip.json"]).status.code(), Some(0));
    assert_eq!(gpcq(&["--json", "causal", "sdbsc.json"]).status.code(), Some(0));
    assert_eq!(gpcq(&["bogus"]).status.code(), Some(2));
    assert_eq!(gpcq(&["noncausal", "xor.json"]).status.code(), Some(2));
    assert_eq!(gpcq(&["types", "--op", "coverage", "--p-su", "0.5;0.5", "--n", "4"]).status.code(), Some(2));
    assert_eq!(gpcq(&["causal", "missing.json"]).status.code(), Some(1));
    assert_eq!(gpcq(&["--threads", "0", "validate", "flip.json"]).status.code(), Some(2));
    let domain = gpcq(&["noncausal", "xor.json", "--seed", "1", "--n", "3"]);
    assert_eq!(domain.status.code(), Some(1));
}

#[test]
fn json_errors_go_to_stderr() {
    let out = gpcq(&["--json", "causal", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let first: Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert!(first["error"].as_str().unwrap().contains("missing.json"));
}

#[test]
fn manifest_records_the_run() {
    let out = gpcq(&["--threads", "2", "noncausal", "flip.json", "--seed", "42", "--restarts", "2"]);
    assert!(out.status.success());
    let m = manifest(&out);
    assert_eq!(m["seed"], 42);
    assert_eq!(m["threads"], 2);
    let digest = m["channel_sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    let again = manifest(&gpcq(&["validate", "flip.json"]));
    assert_eq!(again["channel_sha256"].as_str().unwrap(), digest);
    assert_eq!(m["tolerances"]["povm"], 1e-8);
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = gpcq(&[
        "simulate", "flip.json", "--scheme", "noncausal-sqrt", "--rates", "0.5", "--n", "3", "--trials", "5", "--seed", "1",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "scheme,n,rate,K,M,err,ci_low,ci_high,declares");
    assert_eq!(lines.count(), 1);
}

#[test]
fn schur_check_passes() {
    let out = gpcq(&["schur", "--d", "3", "--n", "4", "check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
