use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isobisect"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_lines(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("JSON line")).collect()
}

#[test]
fn bruteforce_reports_each_graph() {
    let out = run(&["bruteforce", "-i", fixture("cubic_connected_n08.g6").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l["exists"] == true && l["n"] == 8));
}

#[test]
fn bruteforce_over_limit_is_an_input_error() {
    let out = run(&["bruteforce", "-i", fixture("heawood.g6").to_str().unwrap(), "--limit", "12"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_graph6_is_an_input_error() {
    let out = run_stdin(&["decompose"], "not-a-graph\n");
    assert_eq!(out.status.code(), Some(4));
    let missing = run(&["pipeline", "-i", "/nonexistent/graphs.g6"]);
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn verify_accepts_and_rejects() {
    let k33 = fixture("k33.g6");
    let ok = run(&["verify", "-i", k33.to_str().unwrap(), "--coloring", "RRRBBB"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json_lines(&ok)[0]["isomorphic"], true);
    let bad = run(&["verify", "-i", k33.to_str().unwrap(), "--coloring", "RRRRBB"]);
    let line = &json_lines(&bad)[0];
    assert_ne!(bad.status.code(), Some(0), "{line}");
    assert_eq!(line["isomorphic"], false);
}

#[test]
fn pipeline_on_random_graph_is_certified() {
    let out = run(&["pipeline", "--random", "512", "--graph-seed", "4", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = &json_lines(&out)[0];
    assert_eq!(report["success"], true);
    assert_eq!(report["certificate"]["class_size"], 256);
}

#[test]
fn pipeline_writes_dot() {
    let dir = std::env::temp_dir().join(format!("isobisect-dot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("petersen.dot");
    let out = run(&["pipeline", "-i", fixture("petersen.g6").to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph"));
    assert_eq!(text.matches("--").count(), 15);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn decompose_respects_lengths() {
    let out = run(&["decompose", "--random", "200", "--graph-seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json_lines(&out)[0];
    let f1 = v["pair"]["f1"].as_array().unwrap().len();
    let f2 = v["pair"]["f2"].as_array().unwrap().len();
    assert_eq!(f1 + f2, 300);
}

#[test]
fn verify_stream_counts_and_skips() {
    let out = run_stdin(&["verify-stream", "--summary"], "C~\nnot-a-graph\nE{Sw\n");
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["totals"]["found"], 2);
    assert_eq!(lines[0]["totals"]["errors"], 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 graphs checked"));
}

#[test]
fn reducer_find_then_verify() {
    let foster = fixture("foster.g6");
    let out = run(&["reducer", "find", "-i", foster.to_str().unwrap(), "--vertex", "0", "--t", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = std::env::temp_dir().join(format!("isobisect-reducer-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let check = run(&["reducer", "verify", "-i", foster.to_str().unwrap(), "--reducer", path.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
    assert_eq!(json_lines(&check)[0]["certified"], true);
    // the same certificate does not fit a different graph
    let other = run(&["reducer", "verify", "-i", fixture("cl80.g6").to_str().unwrap(), "--reducer", path.to_str().unwrap()]);
    assert_eq!(other.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn experiment_emits_records_and_summary() {
    let out = run(&["experiment", "--n", "256", "--seeds", "3", "--threads", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3]["summary"]["runs"], 3);
}
