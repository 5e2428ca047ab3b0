use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn qsa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsa"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn failed_checks(r: &Value) -> Vec<String> {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

fn write(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), serde_json::to_string_pretty(v).unwrap()).unwrap();
}

fn complete4(dir: &Path) {
    let edges: Vec<[usize; 2]> = (0..4).flat_map(|a| (a + 1..4).map(move |b| [a, b])).collect();
    write(dir, "complete4.json", &json!({ "n_sites": 4, "edges": edges }));
}

fn compile_plaquette(dir: &Path) {
    complete4(dir);
    let out = qsa(
        dir,
        &["compile", "--target", "XZZX", "--graph", "complete4.json", "--out", "plaquette.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn compile_writes_a_one_layer_schedule_that_verifies() {
    let dir = TempDir::new().unwrap();
    compile_plaquette(dir.path());
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("plaquette.json")).unwrap()).unwrap();
    assert_eq!(s["layers"].as_array().unwrap().len(), 1);
    assert_eq!(s["target"], "XZZX");

    let out = qsa(dir.path(), &["verify", "--schedule", "plaquette.json", "--graph", "complete4.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert!(failed_checks(&r).is_empty());
    let out = qsa(dir.path(), &["verify", "--schedule", "plaquette.json", "--tg", "1.1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn compile_reports_depth_law_on_lines() {
    let dir = TempDir::new().unwrap();
    let out = qsa(
        dir.path(),
        &["compile", "--target", "ZZZZZZZZZZ", "--graph", "path_nnn", "--strategy", "line_endpoints"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["metrics"]["depth"], 4);
    assert_eq!(r["metrics"]["oracle"], "dense");
}

#[test]
fn corrupted_layer_fails_with_disjointness() {
    let dir = TempDir::new().unwrap();
    compile_plaquette(dir.path());
    let path = dir.path().join("plaquette.json");
    let mut s: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let first = s["layers"][0][0]["attached_site"].clone();
    s["layers"][0][1]["attached_site"] = first;
    write(dir.path(), "broken.json", &s);
    let out = qsa(dir.path(), &["verify", "--schedule", "broken.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["pass"], false);
    assert!(failed_checks(&r).contains(&"layer_disjointness".to_string()));
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = qsa(d, &["compile", "--target", "XQZ"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["kind"], "parse");

    std::fs::write(d.join("junk.json"), "{ not json").unwrap();
    let out = qsa(d, &["verify", "--schedule", "junk.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["kind"], "json");

    let out = qsa(d, &["verify", "--schedule", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));

    write(d, "bad.json", &json!({"rows": 1, "cols": 3, "boundary": "open", "model": "wen"}));
    let out = qsa(d, &["toric", "build", "--spec", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qsa(d, &["analyze", "strength", "--g", "1", "--t", "0", "--tau", "0.1", "--tau-prime", "0.1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qsa(d, &["compile"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_limits_exit_three() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "big.json", &json!({"rows": 5, "cols": 6, "boundary": "open", "model": "wen"}));
    let out = qsa(dir.path(), &["toric", "ground", "--spec", "big.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["error"]["kind"], "resource");

    compile_plaquette(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_qsa"))
        .current_dir(dir.path())
        .env("QSA_MAX_DENSE_QUBITS", "2")
        .env("QSA_MAX_STATE_QUBITS", "3")
        .args(["verify", "--schedule", "plaquette.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    compile_plaquette(dir.path());
    let args = ["analyze", "error-scaling", "--schedule", "plaquette.json", "--random", "--seed", "7"];
    let a = qsa(dir.path(), &args);
    let b = qsa(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = qsa(
        dir.path(),
        &["analyze", "error-scaling", "--schedule", "plaquette.json", "--random", "--seed", "8"],
    );
    assert_ne!(report(&a)["metrics"]["report"], report(&other)["metrics"]["report"]);
}

#[test]
fn error_scaling_slope_is_one() {
    let dir = TempDir::new().unwrap();
    compile_plaquette(dir.path());
    let out = qsa(dir.path(), &["analyze", "error-scaling", "--schedule", "plaquette.json"]);
    assert_eq!(out.status.code(), Some(0));
    let slope = report(&out)["metrics"]["report"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.1);

    write(dir.path(), "wen.json", &json!({"rows": 3, "cols": 3, "boundary": "open", "model": "wen"}));
    let out = qsa(
        dir.path(),
        &["analyze", "error-scaling", "--spec", "wen.json", "--plaquette", "1,1", "--deltas", "0.01,0.001,0.0001"],
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn strength_report() {
    let dir = TempDir::new().unwrap();
    let out = qsa(
        dir.path(),
        &["analyze", "strength", "--g", "2", "--t", "1", "--n", "2", "--tau", "0.25", "--tau-prime", "0.25"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["metrics"]["g_prime"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["metrics"]["stretched_time"], 2.0);
    let out = qsa(
        dir.path(),
        &["analyze", "strength", "--g", "1", "--t", "1", "--omega=-3", "--omega-prime", "3"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["metrics"]["toric_strength"].as_f64().is_some());
}

#[test]
fn lattice_commands() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "wen.json", &json!({"rows": 3, "cols": 3, "boundary": "open", "model": "wen", "J": 0.5}));
    for args in [
        vec!["toric", "build", "--spec", "wen.json"],
        vec!["toric", "ground", "--spec", "wen.json"],
        vec!["toric", "digital", "--spec", "wen.json", "--states", "3"],
    ] {
        let out = qsa(d, &args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
    let r = report(&qsa(d, &["toric", "build", "--spec", "wen.json"]));
    assert_eq!(r["metrics"]["terms"].as_array().unwrap().len(), 4);
    assert_eq!(r["metrics"]["groups"], 4);
}

#[test]
fn anyon_commands() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "open.json", &json!({"rows": 4, "cols": 4, "boundary": "open", "model": "wen"}));
    write(d, "torus.json", &json!({"rows": 4, "cols": 4, "boundary": "periodic", "model": "wen"}));
    write(
        d,
        "holes.json",
        &json!({"rows": 3, "cols": 3, "boundary": "open", "model": "kitaev_holes",
                "holes": [{"plaquettes": [[0, 1]], "kind": "smooth"}, {"plaquettes": [[1, 2]], "kind": "rough"}]}),
    );
    write(d, "string.json", &json!({"sites": [[1, 1], [2, 2]], "letters": "ZZ"}));

    let out = qsa(d, &["anyon", "syndrome", "--spec", "open.json", "--path", "string.json"]);
    assert_eq!(out.status.code(), Some(0));
    let cells: Vec<Value> = report(&out)["metrics"]["excitations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["plaquette"].clone())
        .collect();
    assert_eq!(cells, vec![json!([0, 0]), json!([2, 2])]);

    let out = qsa(d, &["anyon", "braid", "--spec", "torus.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["metrics"]["expected"], -1.0);

    let out = qsa(d, &["anyon", "memory", "--spec", "torus.json", "--amplitudes", "1:0,0:1,0:0,0.5:0"]);
    assert_eq!(out.status.code(), Some(0));
    let out = qsa(d, &["anyon", "memory", "--spec", "open.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qsa(d, &["anyon", "magic", "--spec", "holes.json", "--theta", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    let out = qsa(d, &["anyon", "magic", "--spec", "holes.json", "--exit", "top"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["kind"], "encoding");

    let out = qsa(d, &["anyon", "cnot", "--spec", "holes.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["metrics"]["rows"].as_array().unwrap().len(), 4);
}
