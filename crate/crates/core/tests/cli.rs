use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mzn_autogen::orchestrator::RunRecord;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzn-autogen")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_reports_missing_include() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.mzn",
        "array[1..10] of var 1..10: q;\nconstraint all_different(q);\nsolve satisfy;\n",
    );
    let o = cli(&["check", &bad, "--spec", "builtin:10"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("ERROR E001 2:1"), "{out}");
    assert!(out.contains("undefined identifier `all_different`"));
    assert!(out.contains("valid: no"));
}

#[test]
fn check_accepts_conforming_model() {
    let o = cli(&["check", &fixture("conformance/array_alldiff_ok.mzn"), "--spec", "builtin:10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("correct: yes"));
    let o = cli(&["check", &fixture("conformance/array_none_bad.mzn"), "--spec", "builtin:8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch: expected an array"));
}

#[test]
fn solve_prints_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.mzn", "var 1..3: x;\nconstraint x > 2;\nsolve satisfy;\n");
    let o = cli(&["solve", &m]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "SATISFIED\nx = 3;\n");
    let u = write(dir.path(), "u.mzn", "var 1..3: x;\nconstraint x > 3;\nsolve satisfy;\n");
    let o = cli(&["solve", &u]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "UNSATISFIABLE\n");
    let s = write(dir.path(), "s.mzn", "var 1..3 x;\n");
    assert_eq!(cli(&["solve", &s]).status.code(), Some(1));
}

#[test]
fn help_and_usage_errors() {
    let o = cli(&["solve", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Usage"));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["bench"]).status.code(), Some(2));
    assert_eq!(cli(&["check", "/nonexistent.mzn", "--spec", "builtin:1"]).status.code(), Some(2));
    assert_eq!(cli(&["generate", "--spec", "builtin:42", "--script", &fixture("paper_replay.json")]).status.code(), Some(2));
}

#[test]
fn generate_with_script_and_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(
        dir.path(),
        "s.json",
        r#"[{"kind":"Generate","response_text":"var int: x;","prompt_tokens":3,"completion_tokens":4}]"#,
    );
    let out = dir.path().join("run.json");
    let o = cli(&["generate", "--spec", "builtin:1", "--script", &script, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let record: RunRecord = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(record.steps, 1);
    assert!(record.aborted.is_some());

    let ok = write(
        dir.path(),
        "ok.json",
        &serde_json::json!([{
            "kind": "Generate",
            "response_text": (1..=10).map(|i| format!("var int: x{i};\n")).collect::<String>() + "solve satisfy;\nBot: done",
            "prompt_tokens": 3,
            "completion_tokens": 4
        }])
        .to_string(),
    );
    let o = cli(&["generate", "--spec", "builtin:1", "--script", &ok]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("% valid: true  correct: true  steps: 1  tokens: 7"));
    assert!(!stdout(&o).contains("done"));
}

#[test]
fn bench_writes_exports_and_replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let o = cli(&["bench", "--script", &fixture("paper_replay.json"), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert_eq!(csv.lines().nth(5).unwrap().split(',').skip(4).collect::<Vec<_>>()[..3], ["no", "no", "10"]);

    let run = out_dir.join("runs").join("run-07.json");
    assert_eq!(cli(&["replay", run.to_str().unwrap()]).status.code(), Some(0));
    let mut record: RunRecord = serde_json::from_str(&std::fs::read_to_string(&run).unwrap()).unwrap();
    record.tokens += 1;
    let tampered = write(dir.path(), "t.json", &serde_json::to_string(&record).unwrap());
    let o = cli(&["replay", &tampered]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("DIFFERS"));
}
