mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{fixture, fixtures_dir};
use serde_json::Value;

fn nqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqs")).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn records(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_streams_header_iterations_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.jsonl");
    let ckpt = dir.path().join("model.json");
    let h2 = fixture("h2");
    let o = nqs(&["run", "--fcidump", s(&h2), "--iters", "20", "--samples", "1e3", "--out", s(&out), "--checkpoint", s(&ckpt)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = records(&out);
    assert_eq!(recs[0]["record"], "header");
    assert_eq!(recs[0]["schema"], "nqs-results");
    let iters: Vec<_> = recs.iter().filter(|r| r["record"] == "iteration").collect();
    assert_eq!(iters.len(), 20);
    assert!(iters.iter().all(|r| r["energy"].is_f64() && r["n_unique"].is_u64() && r["wall_ms"].is_f64()));
    let last = recs.last().unwrap();
    assert_eq!(last["record"], "summary");
    assert_eq!(last["status"], "ok");
    assert!(last["e_fci"].as_f64().unwrap() < -1.13);
    let c = nqs::ansatz::Checkpoint::load(&ckpt).unwrap().into_ansatz().unwrap();
    assert_eq!(c.n_orbitals(), 4);
}

#[test]
fn input_errors_exit_with_one() {
    let o = nqs(&["run", "--fcidump", "/nonexistent/x.fcidump"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(nqs(&["run", "--no-such-flag"]).status.code(), Some(1));
    let h2 = fixture("h2");
    assert_eq!(nqs(&["run", "--fcidump", s(&h2), "--sampler", "gibbs"]).status.code(), Some(1));
    assert_eq!(nqs(&["run", "--fcidump", s(&h2), "--samples", "0"]).status.code(), Some(1));
    assert_eq!(nqs(&["sweep", "--fcidump", s(&h2)]).status.code(), Some(1));
    assert_eq!(nqs(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_run_is_recorded_in_the_stream() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fcidump");
    std::fs::write(&bad, "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n0.5 9 1 0 0\n").unwrap();
    let out = dir.path().join("run.jsonl");
    let o = nqs(&["run", "--fcidump", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let recs = records(&out);
    assert_eq!(recs.last().unwrap()["status"], "error");
    assert!(recs.iter().any(|r| r["record"] == "error"));
}

#[test]
fn sweep_continues_past_a_bad_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.jsonl");
    let a = fixtures_dir().join("h2_0.7414.fcidump");
    let missing = dir.path().join("h2_9.9.fcidump");
    let o = nqs(&["sweep", "--fcidump", s(&a), s(&missing), "--iters", "10", "--samples", "1000", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = records(&out);
    let points: Vec<_> = recs.iter().filter(|r| r["record"] == "point").collect();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0]["status"], "ok");
    assert_eq!(points[0]["bond_length"], 0.7414);
    assert!(points[1]["status"].as_str().unwrap().starts_with("error"));
    assert_eq!(recs.last().unwrap()["status"], "partial");
}

#[test]
fn sample_benchmark_reports_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.jsonl");
    let lih = fixture("lih");
    let o = nqs(&["sample-benchmark", "--fcidump", s(&lih), "--grid", "1000,10000", "--burn-in", "100", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<_> = records(&out).into_iter().filter(|r| r["record"] == "benchmark").collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r["wall_ms"].as_f64().unwrap() >= 0.0);
        assert!(r["tv_distance"].as_f64().unwrap() <= 1.0);
        match r["method"].as_str().unwrap() {
            "bas" => assert!(r["acceptance"].is_null()),
            "mcmc" => assert!(r["acceptance"].as_f64().unwrap() > 0.0),
            m => panic!("unexpected method {m}"),
        }
    }
}

#[test]
fn make_fixtures_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["h2", "lih"] {
        std::fs::copy(fixture(name), dir.path().join(format!("{name}.fcidump"))).unwrap();
    }
    let o = nqs(&["make-fixtures", "--dir", s(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = nqs::oracle::fixtures::FixtureManifest::load(dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.entries.len(), 2);
    let lih = m.get("lih").unwrap();
    assert_eq!(lih.dimension, 225);
    assert!((lih.e_fci - common::reference("lih").e_fci).abs() < 1e-8);
}
