use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn entloss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entloss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const TRIANGLE: &str = r#"{"parties":["A1","A2","A3"],
 "sources":[
  {"state":{"family":"bipartite","schmidt":[0.7071067811865476,0.7071067811865476]},"assignment":{"0":"A1","1":"A2"}},
  {"state":{"family":"bipartite","schmidt":[0.7071067811865476,0.7071067811865476]},"assignment":{"0":"A2","1":"A3"}},
  {"state":{"family":"bipartite","schmidt":[0.7071067811865476,0.7071067811865476]},"assignment":{"0":"A1","1":"A3"}}]}"#;

#[test]
fn build_w_writes_eight_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "w.json", r#"{"family":"w","alpha":0.6,"beta":0.0,"gamma":0.8}"#);
    let out_path = dir.path().join("w.csv");
    let out = entloss(&["build", &spec, "-o", out_path.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let summary = stdout_json(&out);
    assert!((summary["norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((summary["purity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert_eq!(lines.count(), 8);
}

#[test]
fn build_triangle_is_64_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "tri.json", TRIANGLE);
    let out_path = dir.path().join("tri.bin");
    let out = entloss(&["build", &spec, "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let summary = stdout_json(&out);
    let dims: Vec<u64> = summary["dims"].as_array().unwrap().iter().map(|d| d.as_u64().unwrap()).collect();
    assert_eq!(dims.iter().product::<u64>(), 64);
    assert_eq!(summary["party_dims"], serde_json::json!([4, 4, 4]));
}

#[test]
fn bad_assignment_names_the_particle() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "bad.json",
        r#"{"parties":["A","B"],"sources":[{"state":{"family":"bipartite","schmidt":[0.6,0.8]},"assignment":{"0":"A","1":"C"}}]}"#,
    );
    let out = entloss(&["build", &spec, "-o", dir.path().join("x.bin").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "network");
    assert_eq!(err["field"], "sources[0].assignment.1");
}

#[test]
fn schema_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", "{\"family\":\"ghz\",\n\"n\":\"three\"}");
    let out = entloss(&["analyze", &spec]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "schema");
    assert_eq!(err["line"], 2);
}

#[test]
fn missing_file_and_usage_errors_are_json() {
    let out = entloss(&["analyze", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "io");

    let out = entloss(&["sweep", "no_such_family", "-o", "/tmp/x"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");
}

#[test]
fn dimension_cap_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "big.json", r#"{"family":"ghz","n":13}"#);
    let out = entloss(&["analyze", &spec]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "dimension_cap");

    let spec = write(dir.path(), "small.json", r#"{"family":"ghz","n":4}"#);
    let out = entloss(&["analyze", &spec, "--max-dim", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "dimension_cap");
}

#[test]
fn ghz_is_particle_lose_separable() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "g.json", r#"{"family":"ghz","n":3,"theta":0.5}"#);
    let out = entloss(&["analyze", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["intact"]["status"], "entangled");
    assert_eq!(v["particle_lose_separable"]["status"], "separable");
    assert_eq!(v["particle_lose_separable"]["witness_names"], serde_json::json!(["A1"]));
}

#[test]
fn w_is_robust_with_depth_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "w.json", r#"{"family":"w","theta":0.9553166181245093,"phi":0.7853981633974483}"#);
    let out = entloss(&["analyze", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["particle_lose_separable"]["status"], "entangled");
    assert_eq!(v["robustness_depth"]["depth"], 1);
    assert_eq!(v["robustness_depth"]["exhausted"], true);
}

#[test]
fn analyze_reads_state_files_and_apply_loss_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "d.json", r#"{"family":"dicke","n":4,"k":2}"#);
    let full = dir.path().join("d.bin");
    let reduced = dir.path().join("r.bin");
    assert!(entloss(&["build", &spec, "-o", full.to_str().unwrap()]).status.success());
    let out = entloss(&["apply-loss", full.to_str().unwrap(), "--lose", "A1", "-o", reduced.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = entloss(&["witness", reduced.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["dims"], serde_json::json!([2, 2, 2]));
    let out = entloss(&["apply-loss", full.to_str().unwrap(), "--lose", "Z9", "-o", reduced.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_verdicts_exit_with_one() {
    // heavily mixed three-qutrit GHZ: no PPT split, no qubit witness, too large for the mixture search
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "q.json", r#"{"family":"ghz","n":3,"d":3,"mix":0.1}"#);
    let out = entloss(&["witness", &spec]);
    assert_eq!(stdout_json(&out)["biseparability"]["status"], "unknown");
    assert_eq!(out.status.code(), Some(1));

    let spec = write(dir.path(), "q.json", r#"{"family":"ghz","n":3,"d":3,"mix":0.4}"#);
    let out = entloss(&["witness", &spec]);
    assert_eq!(stdout_json(&out)["biseparability"]["status"], "entangled");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn triangle_network_depth_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "tri.json", TRIANGLE);
    let out = entloss(&["network", &spec, "--crosscheck"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["classification"]["predicted_depth"], 1);
    assert_eq!(v["crosscheck"]["party"]["depth"], 1);
    assert_eq!(v["crosscheck"]["party_matches"], true);
}

#[test]
fn sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (family, format) in [("w_nonlinear", "csv"), ("chsh_planes", "json"), ("ghz_family", "csv")] {
        let a = dir.path().join(format!("{family}.a"));
        let b = dir.path().join(format!("{family}.b"));
        for p in [&a, &b] {
            let out = entloss(&[
                "sweep", family, "--grid", "6x5", "--resolution", "64", "--n-max", "4", "--format", format, "-o",
                p.to_str().unwrap(),
            ]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{family}");
    }
}
