use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sparse_cover::cover::PartitionCover;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-cover")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is json")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn setup(dir: &Path) -> (String, String) {
    let g = path(dir, "g.json");
    let c = path(dir, "c.json");
    assert!(run(&["gen", "--family", "grid", "--size", "6", "--seed", "7", "--out", &g]).status.success());
    let out = run(&["cover", "--graph", &g, "--r", "5", "--preset", "A", "--delta", "3", "--out", &c]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (g, c)
}

#[test]
fn verify_accepts_valid_cover() {
    let dir = tempfile::tempdir().unwrap();
    let (g, c) = setup(dir.path());
    let out = run(&["verify", "--graph", &g, "--cover", &c]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["inputs"]["graph"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_names_inflated_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let (g, c) = setup(dir.path());
    let mut cover: PartitionCover = serde_json::from_str(&std::fs::read_to_string(&c).unwrap()).unwrap();
    // move the far corner into the first cluster of partition 0
    let part = &mut cover.partitions[0];
    let far = 35;
    for cl in part.iter_mut() {
        cl.retain(|&v| v != far);
    }
    part.retain(|cl| !cl.is_empty());
    part[0].push(far);
    let tampered = path(dir.path(), "tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&cover).unwrap()).unwrap();
    let out = run(&["verify", "--graph", &g, "--cover", &tampered]);
    assert_eq!(out.status.code(), Some(1));
    let rep = report(&out);
    assert_eq!(rep["checks"]["diameter"], false);
    let failures = rep["failures"].to_string();
    assert!(failures.contains("partition 0 cluster 0"), "{failures}");
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = setup(dir.path());
    let o = path(dir.path(), "x.json");
    assert_eq!(run(&["cover", "--graph", &g, "--r", "5", "--delta", "-1", "--out", &o]).status.code(), Some(2));
    assert_eq!(run(&["cover", "--graph", "missing.json", "--r", "5", "--delta", "2", "--out", &o]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["embed", "--graph", &g, "--r", "5", "--epsilon", "0.9", "--mode", "3eps", "--out", &o]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (g, c) = setup(dir.path());
    let p = path(dir.path(), "p.json");
    let a = run(&["partition", "--graph", &g, "--cover", &c, "--out", &p]);
    let b = run(&["partition", "--graph", &g, "--cover", &c, "--out", &p]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = run(&["verify", "--graph", &g, "--partition", &p]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn decompose_defaults_from_r() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = setup(dir.path());
    let d = path(dir.path(), "d.json");
    let out = run(&["decompose", "--graph", &g, "--delta", "4", "--r", "5", "--out", &d]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["parameters"]["gamma"], 0.8);
    assert_eq!(rep["parameters"]["w"], 4);
    assert_eq!(run(&["verify", "--graph", &g, "--bcd", &d]).status.code(), Some(0));
    assert_eq!(run(&["decompose", "--graph", &g, "--delta", "4", "--out", &d]).status.code(), Some(2));
}

#[test]
fn embed_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = setup(dir.path());
    let e = path(dir.path(), "e.csv");
    let out = run(&["embed", "--graph", &g, "--r", "5", "--epsilon", "0.5", "--mode", "full", "--out", &e]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(format!("{e}.json")).unwrap()).unwrap();
    let k = side["k"].as_u64().unwrap() as usize;
    let text = std::fs::read_to_string(&e).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 36);
    assert!(rows.iter().all(|r| r.split(',').count() == k));
    assert_eq!(report(&out)["measured"]["k"], k);
}
