use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;

fn tv(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tv"))
        .env_remove("TV_CACHE")
        .arg("--cache")
        .arg(cache)
        .args(args)
        .output()
        .expect("tv runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes_cover_all_four_meanings() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("c.jsonl");
    assert_eq!(code(&tv(&c, &["compare", "--a", "2", "--b", "3"])), 0);
    assert_eq!(code(&tv(&c, &["compare", "--a", "2", "--b", "2"])), 1);
    assert_eq!(code(&tv(&c, &["eval", "--index", "1,2"])), 2);
    assert_eq!(code(&tv(&c, &["scan", "--kind", "p-sets", "--rmax", "5", "--nmax", "2"])), 3);
}

#[test]
fn eval_prints_and_caches() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("c.jsonl");
    let first = tv(&c, &["eval", "--index", "2", "--digits", "30"]);
    assert_eq!(code(&first), 0);
    assert!(stdout(&first).starts_with("[1.233700550136169827354311374984"));
    let lines = std::fs::read_to_string(&c).unwrap();
    assert_eq!(lines.lines().count(), 1);
    let rec: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    for field in ["index", "tail_offset", "precision_bits", "lo", "hi", "method", "created_at"] {
        assert!(rec.get(field).is_some(), "{field}");
    }
    let warm = tv(&c, &["eval", "--index", "2", "--digits", "30", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&warm.stdout).unwrap();
    assert_eq!(v["source"], "cache");
    assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 1);
    let again = tv(&c, &["eval", "--index", "2", "--digits", "30"]);
    assert_eq!(stdout(&again), stdout(&first));
}

#[test]
fn env_var_sets_cache_path() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("env.jsonl");
    let o = Command::new(env!("CARGO_BIN_EXE_tv"))
        .env("TV_CACHE", &c)
        .args(["eval", "--index", "3,1", "--digits", "12"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(c.exists());
}

#[test]
fn corrupted_cache_does_not_crash() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("c.jsonl");
    std::fs::write(&c, "garbage\n{\"index\": [2]\n").unwrap();
    let o = tv(&c, &["eval", "--index", "2", "--digits", "10"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("c.jsonl");
    let (a, b) = (d.path().join("a.json"), d.path().join("b.json"));
    for r in [&a, &b] {
        let o = tv(&c, &["chain", "--count", "2", "--per-block", "3", "--report", r.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let v: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    for key in ["scan_id", "parameters", "findings", "status"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn documented_commands() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("c.jsonl");
    let o = tv(&c, &["eval", "--index", "empty", "--tail", "1", "--digits", "5"]);
    assert_eq!(stdout(&o).trim(), "[1.00000, 1.00000]");
    let o = tv(&c, &["compare", "--a", "2,1", "--b", "tail:1:empty"]);
    assert!(stdout(&o).starts_with("Less"));
    let o = tv(&c, &["beta", "--count", "4"]);
    let rows: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("note"))
        .map(|l| l.split_whitespace().nth(1).unwrap().to_string())
        .collect();
    assert_eq!(rows, ["empty", "2", "2,1", "3"]);
    let o = tv(&c, &["phi", "--index", "2,3"]);
    assert_eq!(stdout(&o).trim(), "(2, 3)");
    let o = tv(&c, &["verify", "--suite", "identities", "--nmax", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("AllPassed"));
    let o = tv(&c, &["chain", "--count", "1", "--per-block", "2"]);
    assert!(stdout(&o).starts_with("t(1) = ∞"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exit_code_always_documented(index in "[0-9,a-z]{0,6}", tail in 0u64..4, digits in 1usize..12) {
        let d = tempfile::tempdir().unwrap();
        let c = d.path().join("c.jsonl");
        let o = tv(&c, &["eval", "--index", &index, "--tail", &tail.to_string(), "--digits", &digits.to_string()]);
        let code = code(&o);
        prop_assert!([0, 1, 2].contains(&code), "{index:?} -> {code}");
        if code == 0 {
            prop_assert!(stdout(&o).starts_with('['));
        }
    }
}
