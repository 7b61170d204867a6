use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latsearch")).args(args).output().expect("binary runs")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn grid(dir: &Path) -> String {
    let mut text = String::from("# test map\n6 4\n");
    for y in 0..4 {
        let row: Vec<String> = (0..6).map(|x| ((x * y) % 4 + 1).to_string()).collect();
        text += &row.join(" ");
        text.push('\n');
    }
    let path = p(dir, "map.txt");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn plan_then_verify() {
    let d = tempfile::tempdir().unwrap();
    let (plan, report) = (p(d.path(), "p.csv"), p(d.path(), "r.json"));
    let out = run(&["plan", "--robots", "4", "--radius", "10", "--out", &plan]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(&plan).unwrap();
    assert!(csv.starts_with("robot_id,t,x,y\n"));
    assert!(d.path().join("p.json").exists());

    let out = run(&["verify", "--plan", &plan, "--report", &report]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let balls = r["balls"].as_array().unwrap();
    assert_eq!(balls.len(), 9);
    for b in balls {
        let n = b["n"].as_f64().unwrap();
        for key in ["A_n", "g_n", "last_visit_time", "ratio", "lower", "upper"] {
            assert!(b.get(key).is_some(), "{key}");
        }
        if n >= 5.0 {
            assert!(b["ratio"].as_f64().unwrap() <= (2.0 * n + 7.43) / 4.0 + 1.0 / n);
        }
    }
}

#[test]
fn speeds_and_joins_are_accepted() {
    let d = tempfile::tempdir().unwrap();
    let plan = p(d.path(), "s.csv");
    let out = run(&["plan", "--speeds", "1/2,1", "--radius", "6", "--join", "3:1", "--out", &plan]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let header: Value = serde_json::from_str(&fs::read_to_string(d.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(header["speeds"], serde_json::json!([1, 2, 1]));
    assert_eq!(header["region_count"], 16);
    let out = run(&["verify", "--plan", &plan, "--report", &p(d.path(), "r.json")]);
    assert!(out.status.success());
}

#[test]
fn flow_two_by_two_example() {
    let d = tempfile::tempdir().unwrap();
    let (ledger, moves) = (p(d.path(), "l.jsonl"), p(d.path(), "m.jsonl"));
    fs::write(
        &ledger,
        r#"{"t":1,"entries":[{"id":0,"x":0,"y":0,"old":1,"new":0},{"id":1,"x":10,"y":0,"old":1,"new":0},{"id":2,"x":1,"y":0,"old":0,"new":1},{"id":3,"x":9,"y":0,"old":0,"new":1}]}
{"t":2,"entries":[]}
"#,
    )
    .unwrap();
    let out = run(&["flow", "--ledger", &ledger, "--out", &moves]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<Value> = fs::read_to_string(&moves).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["total_cost"], 2);
    assert_eq!(lines[0]["moves"].as_array().unwrap().len(), 2);
    assert_eq!(lines[1]["total_cost"], 0);
}

#[test]
fn search_log_feeds_flow() {
    let d = tempfile::tempdir().unwrap();
    let map = grid(d.path());
    let (log, moves) = (p(d.path(), "events.jsonl"), p(d.path(), "m.jsonl"));
    let out = run(&["search", "--pod", &map, "--robots", "3", "--supercell", "2", "--out", &log]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&log).unwrap();
    let mut last = f64::INFINITY;
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v["t"].is_u64() && v["transfers"].is_array());
        let r = v["residual_total"].as_f64().unwrap();
        assert!(r <= last);
        last = r;
    }
    let out = run(&["flow", "--ledger", &log, "--out", &moves]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    let map = grid(d.path());
    let (a, b) = (p(d.path(), "a.json"), p(d.path(), "b.json"));
    let common = ["simulate", "--pod", &map, "--robots", "2", "--pod-per-pass", "0.4", "--trials", "3000", "--seed", "9"];
    let one: Vec<&str> = common.iter().copied().chain(["--threads", "1", "--out", &a]).collect();
    let many: Vec<&str> = common.iter().copied().chain(["--threads", "4", "--out", &b]).collect();
    assert!(run(&one).status.success());
    assert!(run(&many).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn help_lists_flags_with_defaults() {
    let out = run(&["simulate", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for s in [
        "--pod", "--robots", "--supercell", "--pod-per-pass", "--threshold", "--horizon", "--trials", "--seed",
        "--threads", "--out", "[default: 0.5]", "[default: 0.0001]", "[default: 1000000]", "[default: 1000]",
        "[default: 0]", "[default: auto]",
    ] {
        assert!(text.contains(s), "missing {s}");
    }
    let plan = String::from_utf8_lossy(&run(&["plan", "--help"]).stdout).to_string();
    for s in ["--robots", "--radius", "--speeds", "--join", "--out"] {
        assert!(plan.contains(s), "missing {s}");
    }
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path(), "x.csv");
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["plan", "--radius", "5", "--out", &out]).status.code(), Some(1));
    assert_eq!(
        run(&["plan", "--robots", "3", "--speeds", "1,2", "--radius", "5", "--out", &out]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["plan", "--robots", "4", "--radius", "0", "--out", &out]).status.code(), Some(1));
    assert_eq!(
        run(&["verify", "--plan", &p(d.path(), "missing.csv"), "--report", &out]).status.code(),
        Some(2)
    );
    let bad = p(d.path(), "bad.txt");
    fs::write(&bad, "2 2\n1 1\n").unwrap();
    let r = run(&["search", "--pod", &bad, "--robots", "1", "--out", &out]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!r.stderr.is_empty());
}
