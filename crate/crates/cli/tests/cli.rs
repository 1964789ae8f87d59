use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn commhide(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commhide"))
        .current_dir(dir)
        .env_remove("COMMHIDE_THREADS")
        .env("RUST_BACKTRACE", "0")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = commhide(dir, args);
    assert!(
        out.status.success(),
        "commhide {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// JSON records after the provenance line.
fn records(stdout: &str) -> Vec<Value> {
    let mut lines = stdout
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap());
    let head = lines.next().expect("provenance line");
    assert_eq!(head["record"], "provenance");
    assert!(head["version"].is_string());
    lines.collect()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const TWO_TRIANGLES: &str = "a b\nb c\nc a\nd e\ne f\nf d\nc d\n";

#[test]
fn two_triangles_give_two_communities() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "g.txt", TWO_TRIANGLES);
    let out = ok(
        tmp.path(),
        &["--json", "detect", "--graph", "g.txt", "--out", "p.tsv"],
    );
    assert_eq!(records(&out)[0]["communities"], 2);
    let part = fs::read_to_string(tmp.path().join("p.tsv")).unwrap();
    assert_eq!(part.lines().count(), 6);
    assert!(part.starts_with("a\t"));
}

#[test]
fn malformed_line_is_reported_by_number() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "g.txt", "a b\nb c d\n");
    let out = commhide(
        tmp.path(),
        &["detect", "--graph", "g.txt", "--out", "p.tsv"],
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn karate_louvain_modularity() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "--json",
        "detect",
        "--graph",
        "builtin:karate",
        "--seed",
        "1",
        "--out",
        "p.tsv",
    ];
    let rec = &records(&ok(tmp.path(), &args))[0];
    assert!(rec["modularity"].as_f64().unwrap() >= 0.38, "{rec}");
}

fn deceive(dir: &Path, extra: &[&str]) -> Vec<Value> {
    let mut args = vec![
        "--json",
        "deceive",
        "--graph",
        "builtin:karate",
        "--seed",
        "4",
        "--out",
        "r.txt",
        "--plan",
        "plan.jsonl",
    ];
    args.extend_from_slice(extra);
    records(&ok(dir, &args))
}

fn plan(dir: &Path) -> Vec<Value> {
    fs::read_to_string(dir.join("plan.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn zero_budget_leaves_graph_unchanged() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &["detect", "--graph", "builtin:karate", "--out", "p.tsv"],
    );
    deceive(tmp.path(), &["--budget-frac", "0", "--partition", "p.tsv"]);
    assert!(plan(tmp.path()).is_empty());
    // Karate ids are 0..33; the rewired file must hold the same 78 edges.
    let text = fs::read_to_string(tmp.path().join("r.txt")).unwrap();
    assert_eq!(text.lines().count(), 78);
    let out = ok(
        tmp.path(),
        &[
            "--json",
            "evaluate",
            "--graph",
            "builtin:karate",
            "--rewired",
            "r.txt",
            "--partition",
            "p.tsv",
            "--target",
            "0",
        ],
    );
    let rec = &records(&out)[0];
    assert_eq!(rec["nmi"], 1.0);
    assert_eq!(rec["comm_splits"], 1);
    assert_eq!(rec["comm_uniformity"], 0.0);
}

#[test]
fn greedy_plan_losses_are_positive() {
    let tmp = TempDir::new().unwrap();
    let summary = &deceive(tmp.path(), &["--budget-frac", "0.5"])[0];
    let steps = plan(tmp.path());
    assert!(!steps.is_empty());
    assert!(steps.iter().all(|s| s["loss"].as_f64().unwrap() > 0.0));
    let total: f64 = steps.iter().map(|s| s["loss"].as_f64().unwrap()).sum();
    assert!((total - summary["permanence_loss"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn split_budget_is_honored() {
    let tmp = TempDir::new().unwrap();
    let summary = &deceive(
        tmp.path(),
        &[
            "--budget-frac",
            "0.6",
            "--beta-add-frac",
            "0.7",
            "--beta-del-frac",
            "0.3",
        ],
    )[0];
    let budget = &summary["budget"];
    let (add, del) = (
        budget["beta_add"].as_u64().unwrap(),
        budget["beta_del"].as_u64().unwrap(),
    );
    assert_eq!(add + del, budget["beta"].as_u64().unwrap());
    assert!(summary["additions"].as_u64().unwrap() <= add);
    assert!(summary["deletions"].as_u64().unwrap() <= del);
    let added = plan(tmp.path())
        .iter()
        .filter(|s| s["kind"] == "AddInter")
        .count();
    assert_eq!(added as u64, summary["additions"].as_u64().unwrap());
}

#[test]
fn unknown_method_and_target_are_rejected() {
    let tmp = TempDir::new().unwrap();
    for bad in [["--method", "magic"], ["--target", "99"]] {
        let mut args = vec!["deceive", "--graph", "builtin:karate", "--out", "r.txt"];
        args.extend_from_slice(&bad);
        assert!(!commhide(tmp.path(), &args).status.success(), "{bad:?}");
    }
}

#[test]
fn reruns_reproduce_files() {
    let tmp = TempDir::new().unwrap();
    let read = |name: &str| fs::read(tmp.path().join(name)).unwrap();
    ok(
        tmp.path(),
        &[
            "detect",
            "--graph",
            "builtin:karate",
            "--seed",
            "2",
            "--out",
            "p.tsv",
        ],
    );
    let first = read("p.tsv");
    deceive(tmp.path(), &["--partition", "p.tsv", "--method", "dice"]);
    let (graph, steps) = (read("r.txt"), read("plan.jsonl"));
    ok(
        tmp.path(),
        &[
            "detect",
            "--graph",
            "builtin:karate",
            "--seed",
            "2",
            "--out",
            "p.tsv",
        ],
    );
    deceive(tmp.path(), &["--partition", "p.tsv", "--method", "dice"]);
    assert_eq!(first, read("p.tsv"));
    assert_eq!(graph, read("r.txt"));
    assert_eq!(steps, read("plan.jsonl"));
}

#[test]
fn single_value_sweep_equals_protocol_mean() {
    let tmp = TempDir::new().unwrap();
    let common = [
        "--graph",
        "builtin:karate",
        "--runs",
        "3",
        "--seed",
        "5",
        "--target",
        "each",
    ];
    let mut eval = vec!["--json", "evaluate", "--budget-frac", "0.4"];
    eval.extend_from_slice(&common);
    let mut sw = vec!["--json", "sweep", "--axis", "budget", "--values", "0.4"];
    sw.extend_from_slice(&common);
    let mean = records(&ok(tmp.path(), &eval)).pop().unwrap();
    let row = records(&ok(tmp.path(), &sw)).pop().unwrap();
    for key in ["nmi", "mnmi", "comm_splits", "comm_uniformity", "cells"] {
        assert_eq!(mean[key], row["mean"][key], "{key}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "--json",
        "evaluate",
        "--graph",
        "builtin:karate",
        "--runs",
        "4",
        "--cells",
    ];
    let strip = |s: String| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    let default = strip(ok(tmp.path(), &args));
    let single = Command::new(env!("CARGO_BIN_EXE_commhide"))
        .env("COMMHIDE_THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    assert!(single.status.success());
    assert_eq!(default, strip(String::from_utf8(single.stdout).unwrap()));
    let mut seq = vec!["--sequential"];
    seq.extend_from_slice(&args);
    assert_eq!(default, strip(ok(tmp.path(), &seq)));
}

#[test]
fn generate_then_detect_round_trip() {
    let tmp = TempDir::new().unwrap();
    let gen = [
        "--json",
        "generate",
        "--n",
        "120",
        "--k",
        "3",
        "--mu",
        "0.1",
        "--avg-deg",
        "8",
        "--seed",
        "9",
        "--out",
        "g.txt",
        "--truth",
        "t.tsv",
    ];
    let rec = &records(&ok(tmp.path(), &gen))[0];
    assert_eq!(rec["communities"], 3);
    let out = ok(
        tmp.path(),
        &[
            "--json",
            "evaluate",
            "--graph",
            "g.txt",
            "--rewired",
            "g.txt",
            "--partition",
            "t.tsv",
            "--target",
            "0",
        ],
    );
    // Well-separated planted communities are recovered exactly.
    assert_eq!(records(&out)[0]["nmi"], 1.0);
}

#[test]
fn bench_and_node_hiding_emit_records() {
    let tmp = TempDir::new().unwrap();
    let rows = records(&ok(
        tmp.path(),
        &["--json", "bench", "--sizes", "500,1000", "--repeats", "1"],
    ));
    assert_eq!(rows.iter().filter(|r| r["record"] == "timing").count(), 2);
    assert!(rows.iter().any(|r| r["record"] == "fit"));
    let out = ok(
        tmp.path(),
        &[
            "--json",
            "hide-nodes",
            "--graph",
            "builtin:karate",
            "--runs",
            "2",
        ],
    );
    let score = records(&out).pop().unwrap();
    let s = score["score"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&s));
}

#[test]
fn table_output_is_aligned() {
    let tmp = TempDir::new().unwrap();
    let out = ok(
        tmp.path(),
        &["detect", "--graph", "builtin:karate", "--out", "p.tsv"],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    // Each value starts in the same column as its heading.
    let col = lines[0].find("communities").unwrap();
    assert!(lines[1][..col].ends_with(' '));
    assert!(lines[1][col..].starts_with(char::is_numeric));
}
