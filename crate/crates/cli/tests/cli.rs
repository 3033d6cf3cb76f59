use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qsk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsk"))
        .current_dir(dir)
        .env("QSK_THREADS", "1")
        .args(args)
        .output()
        .expect("spawn qsk")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = qsk(dir, args);
    assert!(
        out.status.success(),
        "qsk {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_writes_dimacs_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "gen", "--n", "20", "--m", "80", "--seed", "7", "--count", "3", "--out-dir", ".",
    ];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".cnf"))
        .collect();
    names.sort();
    assert_eq!(names.len(), 3);
    for name in &names {
        let text = fs::read_to_string(a.path().join(name)).unwrap();
        assert_eq!(text, fs::read_to_string(b.path().join(name)).unwrap());
        let header = text.lines().find(|l| l.starts_with("p ")).unwrap();
        assert_eq!(header, "p cnf 20 80");
        let clauses = text
            .lines()
            .filter(|l| !l.starts_with('c') && !l.starts_with('p') && !l.trim().is_empty())
            .count();
        assert_eq!(clauses, 80);
    }
}

#[test]
fn prespecified_instances_are_soluble() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "gen", "--n", "10", "--m", "60", "--ensemble", "prespecified", "--solution", "613",
            "--count", "5", "--format", "json",
        ],
    );
    let inputs: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .filter(|p| p.ends_with(".json"))
        .collect();
    assert_eq!(inputs.len(), 5);
    let mut args = vec!["simulate", "--rho", "0.2", "--tau", "0.3", "--format", "json", "--input"];
    args.extend(inputs.iter().map(String::as_str));
    let out = ok(dir.path(), &args);
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!(r["solutions"].as_u64().unwrap() >= 1, "{r}");
    }
}

#[test]
fn exact_matches_small_table_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["exact", "--n", "4", "--m", "4", "--rho", "0.39583225", "--tau", "0.20138925"],
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = v["value"].as_f64().unwrap();
    assert!((p - 0.9085).abs() < 2e-4, "{p}");
    let manifest: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(manifest["config"]["command"], "exact");
}

#[test]
fn replay_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate", "--n", "8", "--m", "24", "--samples", "20", "--seed", "5", "--rho",
            "0.2", "--tau", "0.3", "-o", "first.csv",
        ],
    );
    let manifest = dir.path().join("first.csv.manifest.json");
    assert_eq!(read_json(&manifest)["config"]["command"], "simulate");
    ok(
        dir.path(),
        &["replay", manifest.to_str().unwrap(), "-o", "second.csv"],
    );
    let a = fs::read(dir.path().join("first.csv")).unwrap();
    let b = fs::read(dir.path().join("second.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    // unparseable arguments
    assert_eq!(qsk(dir.path(), &["exact", "--n", "x"]).status.code(), Some(2));
    // parameter outside its domain
    assert_eq!(
        qsk(dir.path(), &["decay", "--mu", "4", "--rho", "0.2", "--tau", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qsk(dir.path(), &["optimize", "--mu", "5..1"]).status.code(),
        Some(2)
    );
    // exact sum beyond its work budget
    assert_eq!(
        qsk(
            dir.path(),
            &["exact", "--n", "60", "--m", "6000", "--rho", "0.2", "--tau", "0.3"]
        )
        .status
        .code(),
        Some(3)
    );
    // missing input file
    assert_eq!(
        qsk(
            dir.path(),
            &["simulate", "--input", "absent.cnf", "--rho", "0.2", "--tau", "0.3"]
        )
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn sweep_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["sweep", "--mu", "1,2", "--checkpoint", "ck.jsonl", "-o", "a.csv"],
    );
    let lines = fs::read_to_string(dir.path().join("ck.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    ok(
        dir.path(),
        &[
            "sweep", "--mu", "1,2,3", "--checkpoint", "ck.jsonl", "--resume", "-o", "b.csv",
        ],
    );
    let lines = fs::read_to_string(dir.path().join("ck.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 3);
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(b.lines().count(), a.lines().count() + 1);
    assert!(b.starts_with(&a));
}

#[test]
fn mu_ranges_expand() {
    let dir = tempfile::tempdir().unwrap();
    let rows = |args: &[&str]| {
        let out = ok(dir.path(), args);
        String::from_utf8(out.stdout).unwrap().lines().count() - 1
    };
    let base = ["decay", "--rho", "0.2", "--tau", "0.3", "--mu"];
    let with = |extra: &[&'static str]| {
        let mut v = base.to_vec();
        v.extend_from_slice(extra);
        v
    };
    assert_eq!(rows(&with(&["1..4"])), 4);
    assert_eq!(rows(&with(&["1,2.5"])), 2);
    assert_eq!(rows(&with(&["1..2", "--step", "0.25"])), 5);
    assert_eq!(rows(&with(&["0.1..10", "--log", "--points", "3"])), 3);
}
