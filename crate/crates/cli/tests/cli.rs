use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frame-extract"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_identity_basis() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.json", r#"{"dim": 3, "vectors": [[1,0,0],[0,1,0],[0,0,1]]}"#);
    let out = run(&["analyze", &f]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "frame-extract/1");
    assert_eq!(v["result"]["A"], 1.0);
    assert_eq!(v["result"]["B"], 1.0);
    assert_eq!(v["result"]["parseval"], true);
    assert_eq!(v["result"]["dimension_identity"], 3.0);
}

#[test]
fn analyze_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.csv", "# two copies\n1,0\n0,1\n1,0\n0,1\n");
    let v = json(&run(&["analyze", &f]));
    assert!((v["result"]["A"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(v["result"]["tight"], true);
    assert_eq!(v["result"]["parseval"], false);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.csv", "1,0\n0,oops\n");
    let out = run(&["analyze", &f]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    let g = write(dir.path(), "bad.json", "{\"dim\": 2, \"vectors\": [[1, 0]");
    assert_eq!(run(&["analyze", &g]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/nonexistent/frame.json"]).status.code(), Some(2));
}

#[test]
fn rank_deficient_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "r.csv", "1,0\n2,0\n");
    assert_eq!(run(&["analyze", &f]).status.code(), Some(3));
}

#[test]
fn rank_deficient_extract_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "r.csv", "1,0\n2,0\n");
    assert_eq!(run(&["extract", &f]).status.code(), Some(3));
}

#[test]
fn cc_frame_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["cc.json", "cc.csv"] {
        let path = dir.path().join(name);
        let out = run(&[
            "counterexample",
            "--kind",
            "cc",
            "--n",
            "8",
            "--frame-out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let sums = &json(&out)["result"]["partial_sums"];
        assert!(sums.as_array().unwrap().iter().all(|s| s["holds"] == true));
        let v = json(&run(&["analyze", path.to_str().unwrap()]));
        assert_eq!(v["result"]["tight"], true, "{name}");
        assert_eq!(v["result"]["parseval"], true, "{name}");
        assert_eq!(v["result"]["dim"], 8);
    }
}

#[test]
fn extract_orthonormal_basis_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.json", r#"{"dim": 3, "vectors": [[1,0,0],[0,1,0],[0,0,1]]}"#);
    let out = run(&["extract", &f]);
    assert!(out.status.success());
    let r = &json(&out)["result"]["report"];
    assert_eq!(r["stopped_reason"], "target_reached");
    let c = r["certificate"]["constant"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 1e-12, "{c}");
}

#[test]
fn random_extraction_is_byte_identical() {
    let a = run(&["extract", "--random", "16", "64", "--seed", "3"]);
    let b = run(&["extract", "--random", "16", "64", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("wall_time"));
}

#[test]
fn timing_adds_wall_time() {
    let out = run(&["extract", "--random", "4", "12", "--timing"]);
    assert!(json(&out)["result"]["report"]["wall_time_seconds"].is_number());
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.json");
    let out = run(&["analyze", "--random", "3", "5", "-o", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(v["command"], "analyze");
}

#[test]
fn bad_parameters_exit_two() {
    assert_eq!(run(&["extract", "--random", "4", "8", "--epsilon", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["extract", "--random", "4", "8", "--nu", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["greedy", "--generator", "projected-basis", "--terms", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["extract"]).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_four() {
    let out = run(&[
        "extract", "--random", "12", "36", "--epsilon", "0.05", "--c2", "0.99", "--max-steps", "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["result"]["report"]["stopped_reason"], "step_budget_exhausted");
}

#[test]
fn bracketless_layout() {
    let out = run(&["counterexample", "--kind", "bracketless", "--blocks", "4"]);
    assert!(out.status.success());
    let r = &json(&out)["result"];
    assert_eq!(r["layout"]["ambient_dim"], 7);
    assert_eq!(r["frame"]["vectors"].as_array().unwrap().len(), 10);
    assert_eq!(r["frame"]["dim"], 7);
}

#[test]
fn bracketless_diagnostics_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    let out = run(&[
        "counterexample",
        "--kind",
        "bracketless",
        "--blocks",
        "8",
        "--diagnose",
        "--csv",
        p.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("n,j0,"));
    assert_eq!(lines.len(), 1 + 5);
}

#[test]
fn greedy_projected_basis() {
    let out = run(&["greedy", "--generator", "projected-basis", "--terms", "12"]);
    assert!(out.status.success());
    let r = &json(&out)["result"];
    assert_eq!(r["thresholds_met"], true);
    assert_eq!(r["selection"]["indices"].as_array().unwrap().len(), 12);
    assert_eq!(r["stability_from_third"]["stable"], true);
}

#[test]
fn greedy_from_file_stream() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "s.csv", "1,0,0\n1,1,0\n0,1,0\n0,0,3\n");
    let out = run(&["greedy", "--generator", "file", "--file", &f, "--terms", "3"]);
    assert!(out.status.success());
    let r = &json(&out)["result"];
    let idx: Vec<u64> = r["selection"]["indices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(idx, vec![0, 2, 3]);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--instances", "20"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["result"]["lunin_pass"], true);
}
