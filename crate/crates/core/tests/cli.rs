use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn subfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subfit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const TWO_LINES: &str = "# dim=2\n1,0\n2,0\n-3,0\n0,1\n0,-2\n0,0.5\n";

#[test]
fn fit_single_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "diag.csv", "2,0\n0,1\n");
    let out = subfit(&["fit-single", "--input", &input, "--rank", "1", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["cost"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["model"]["type"], "union");
    assert!(v.get("timestamp").is_none());
}

#[test]
fn timestamp_present_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "diag.csv", "2,0\n0,1\n");
    let v = json(&subfit(&["fit-single", "--input", &input, "--rank", "1"]));
    assert!(v["timestamp"].is_string());
}

#[test]
fn exhaustive_union_planted_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "lines.csv", TWO_LINES);
    let out = subfit(&[
        "fit-union", "--input", &input, "--rank", "1", "--count", "2", "--exhaustive",
        "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["cost"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["partition"], serde_json::json!([0, 0, 0, 1, 1, 1]));
}

#[test]
fn heuristic_union_planted_lines_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "lines.csv", TWO_LINES);
    let csv = dir.path().join("trace.csv");
    let out = subfit(&[
        "fit-union", "--input", &input, "--rank", "1", "--count", "2", "--restarts", "8",
        "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["cost"].as_f64().unwrap().abs() < 1e-12);
    let trace = std::fs::read_to_string(csv).unwrap();
    assert!(trace.starts_with("iteration,cost\n"));
}

#[test]
fn exhaustive_limit_is_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "lines.csv", TWO_LINES);
    let out = subfit(&[
        "fit-union", "--input", &input, "--rank", "1", "--count", "2", "--exhaustive",
        "--exhaustive-limit", "5",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = write(dir.path(), "ragged.csv", "1,2\n3\n");
    let out = subfit(&["fit-single", "--input", &ragged, "--rank", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let ok = write(dir.path(), "ok.csv", "1,2\n");
    let out = subfit(&["fit-single", "--input", &ok, "--rank", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_error_exit_64() {
    assert_eq!(subfit(&["fit-single", "--frobnicate"]).status.code(), Some(64));
    assert_eq!(subfit(&["--help"]).status.code(), Some(0));
}

#[test]
fn invariant_fit_reports_group() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "inv.csv", "1,0,0,1\n0,1,1,0\n1,1,0,0\n");
    let out = subfit(&[
        "fit-invariant", "--input", &input, "--group-order", "2", "--block-size", "2",
        "--pidim", "1", "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["model"]["type"], "invariant");
    assert_eq!(v["model"]["group"], serde_json::json!({"p": 2, "q": 2}));
}

#[test]
fn report_rescore_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "lines.csv", TWO_LINES);
    let out = subfit(&["fit-single", "--input", &input, "--rank", "1", "--no-timestamp"]);
    let report = write(dir.path(), "r.json", std::str::from_utf8(&out.stdout).unwrap());
    let check = subfit(&["report", "--input", &input, "--report", &report]);
    assert_eq!(check.status.code(), Some(0));
    assert_eq!(json(&check)["consistent"], true);

    let mut v = json(&out);
    v["cost"] = serde_json::json!(v["cost"].as_f64().unwrap() + 1.0);
    let tampered = write(dir.path(), "t.json", &v.to_string());
    let check = subfit(&["report", "--input", &input, "--report", &tampered]);
    assert_eq!(check.status.code(), Some(1));
}

#[test]
fn demo_lines_plane_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = subfit(&[
        "demo", "--name", "lines-plane", "--grid", "0:2:0.5", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,cost"));
    for line in lines {
        let (c, cost) = line.split_once(',').unwrap();
        let (c, cost): (f64, f64) = (c.parse().unwrap(), cost.parse().unwrap());
        assert!((cost - 1.0 / (1.0 + c * c)).abs() < 1e-12);
    }
}

#[test]
fn demo_families_run() {
    for name in ["weak-limit", "rank-closure", "msap-separation"] {
        let out = subfit(&["demo", "--name", name, "--no-timestamp"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(json(&out).is_object());
    }
}
