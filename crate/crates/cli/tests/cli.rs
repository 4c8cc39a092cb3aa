use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn hopset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopset")).args(args).output().expect("spawn")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn generate_path_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p5.txt");
    let out = hopset(&["generate", "--family", "path", "--n", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines, ["5 4", "0 1", "1 2", "2 3", "3 4"]);
}

#[test]
fn seq_with_oracle_passes() {
    let out = hopset(&["shortcut-seq", "--n", "16", "--k", "2", "--seed", "1,2", "--oracle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r["passed"] == true));
    assert_eq!(recs[0]["head_tail_before"], 15);
}

#[test]
fn oracle_over_cap_is_config_error() {
    let out = hopset(&["shortcut-par", "--n", "600", "--oracle"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hopset(&["shortcut-seq", "--n", "8", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hopset(&["generate", "--family", "layered-grid", "--n", "10", "--width", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |p: &std::path::Path| -> Vec<Value> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| {
                let mut v: Value = serde_json::from_str(l).unwrap();
                v["wall_time_us"] = 0.into();
                v
            })
            .collect()
    };
    let mut runs = Vec::new();
    for (i, extra) in [&[][..], &["--concurrent"][..]].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.jsonl"));
        let mut args = vec!["shortcut-par", "--family", "random-dag", "--p", "0.1", "--n", "80", "--seed", "3,4,5"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", path.to_str().unwrap()]);
        assert!(hopset(&args).status.success());
        runs.push(strip(&path));
    }
    assert_eq!(runs[0].len(), 3);
    let mut a = runs[0].clone();
    let mut b = runs[1].clone();
    for v in a.iter_mut().chain(b.iter_mut()) {
        v["config"]["exec"] = Value::Null;
        v["config"]["output"] = Value::Null;
    }
    assert_eq!(a, b);
}

#[test]
fn reach_and_congest_on_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "6 5\n0 1\n1 2\n3 2\n4 5\n5 4\n").unwrap();
    let input = g.to_str().unwrap();
    let out = hopset(&["reach", "--input", input, "--source", "0", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(records(&out)[0]["reach"]["reached_count"], 3);

    let trace = dir.path().join("trace.log");
    let out = hopset(&[
        "congest",
        "--input",
        input,
        "--source",
        "0",
        "--oracle",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = &records(&out)[0];
    assert_eq!(rec["congest"]["component_size"], 4);
    assert!(rec["rounds"]["sampling_bfs"].as_u64().is_some());
    let log = fs::read_to_string(&trace).unwrap();
    assert!(log.lines().next().unwrap().starts_with("round="));
}

#[test]
fn bench_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.jsonl");
    let out = hopset(&[
        "bench",
        "--algorithm",
        "seq",
        "--sizes",
        "32,64,128",
        "--seed",
        "1,2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = hopset(&["fit", path.to_str().unwrap(), "--field", "shortcuts_added"]);
    assert!(out.status.success());
    let fit: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(fit["points"], 3);
    assert!(fit["slope"].as_f64().unwrap() > 0.0);

    let out = hopset(&["fit", path.to_str().unwrap(), "--field", "no_such_field"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diameter_and_csv() {
    let out = hopset(&["diameter", "--family", "layered-grid", "--n", "12", "--width", "3", "--oracle"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["exact"], 5);
    assert!(v["estimate"].as_u64().unwrap() <= 5);

    let out = hopset(&["shortcut-seq", "--n", "10", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains("work.shortcuts_added"));
}
