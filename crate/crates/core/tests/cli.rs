mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;

fn nedkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nedkit"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Env {
    _dir: tempfile::TempDir,
    snap: PathBuf,
}

fn saadi_env() -> Env {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("saadi.snap");
    let o = nedkit(&[
        "build-snapshot",
        "--input",
        p(&fixture("saadi.dump")),
        "--output",
        p(&snap),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    Env { _dir: dir, snap }
}

#[test]
fn build_snapshot_reports_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("s.snap");
    let o = nedkit(&[
        "build-snapshot",
        "--input",
        p(&fixture("saadi.dump")),
        "--output",
        p(&snap),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("entities         7"), "{out}");
    assert!(out.contains("build_timestamp  1700000000"), "{out}");
    assert!(snap.exists());
}

#[test]
fn build_snapshot_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        nedkit(&[
            "build-snapshot",
            "--input",
            p(&fixture("saadi.dump")),
            "--output",
            p(out),
        ]);
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn missing_dump_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = nedkit(&[
        "build-snapshot",
        "--input",
        "/nonexistent/dump",
        "--output",
        p(&dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/dump"));
}

#[test]
fn duplicate_title_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = nedkit(&[
        "build-snapshot",
        "--input",
        p(&fixture("duplicate.dump")),
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("\"A\""), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(nedkit(&["disambiguate"]).status.code(), Some(2));
    assert_eq!(nedkit(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn disambiguate_matches_golden() {
    let env = saadi_env();
    let o = nedkit(&[
        "disambiguate",
        "--snapshot",
        p(&env.snap),
        "--input",
        p(&fixture("saadi_sentence.jsonl")),
        "--verbose-ambiguity",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), read_fixture("saadi_sentence.golden.jsonl"));
}

#[test]
fn disambiguate_writes_output_file() {
    let env = saadi_env();
    let out = env.snap.with_extension("jsonl");
    let o = nedkit(&[
        "disambiguate",
        "--snapshot",
        p(&env.snap),
        "--input",
        p(&fixture("saadi_sentence.jsonl")),
        "--output",
        p(&out),
        "--workers",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let decisions: Vec<&str> = lines
        .iter()
        .map(|v| v["decision"].as_str().unwrap())
        .collect();
    assert_eq!(decisions, ["Saadi", "City", "Shiraz"]);
    assert!(lines[0].get("ambiguity_list").is_none());
}

#[test]
fn unknown_surface_is_nil() {
    let env = saadi_env();
    let input = env.snap.with_extension("in.jsonl");
    std::fs::write(
        &input,
        r#"{"doc_id":"z","text":"Zanzibar","mentions":[{"start":0,"end":8,"surface":"Zanzibar"}]}"#,
    )
    .unwrap();
    let o = nedkit(&[
        "disambiguate",
        "--snapshot",
        p(&env.snap),
        "--input",
        p(&input),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["decision"], "NIL");
    assert_eq!(v["confidence"], 0.0);
}

#[test]
fn module_subset_and_text_report() {
    let env = saadi_env();
    let o = nedkit(&[
        "disambiguate",
        "--snapshot",
        p(&env.snap),
        "--input",
        p(&fixture("saadi_sentence.jsonl")),
        "--modules",
        "llc1",
        "--report",
        "text",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("\"Saadi\" -> Saadi"), "{out}");
    assert!(out.contains("llc1="));
    assert!(!out.contains("textual="));
}

#[test]
fn bad_module_name_exits_2() {
    let env = saadi_env();
    let o = nedkit(&[
        "disambiguate",
        "--snapshot",
        p(&env.snap),
        "--input",
        p(&fixture("saadi_sentence.jsonl")),
        "--modules",
        "llc3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infobox_rules_file_is_accepted() {
    let env = saadi_env();
    let rules = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("config/infobox_rules.toml");
    let o = nedkit(&[
        "disambiguate",
        "--snapshot",
        p(&env.snap),
        "--input",
        p(&fixture("saadi_sentence.jsonl")),
        "--infobox-rules",
        p(&rules),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

fn evaluate(env: &Env, input: &str, extra: &[&str]) -> Output {
    let mut args = vec!["evaluate", "--snapshot", p(&env.snap), "--input"];
    let path = fixture(input);
    args.push(p(&path));
    args.extend_from_slice(extra);
    nedkit(&args)
}

#[test]
fn evaluate_perfect() {
    let env = saadi_env();
    let o = evaluate(&env, "eval_perfect.jsonl", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("micro_f1         1.0000"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn evaluate_mixed_json() {
    let env = saadi_env();
    let o = evaluate(&env, "eval_mixed.jsonl", &["--report", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (v["tp"].as_u64(), v["fp"].as_u64(), v["fn"].as_u64()),
        (Some(1), Some(1), Some(1))
    );
    assert_eq!(v["micro_precision"], 0.5);
    assert_eq!(v["micro_recall"], 0.5);
    assert_eq!(v["micro_f1"], 0.5);
}

#[test]
fn evaluate_nif() {
    let env = saadi_env();
    let o = evaluate(&env, "eval_perfect.nif", &["--format", "nif"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("tp               3"), "{}", stdout(&o));
}

#[test]
fn evaluate_malformed_exits_2() {
    let env = saadi_env();
    let o = evaluate(&env, "eval_malformed.jsonl", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn corrupt_snapshot_exits_2() {
    let env = saadi_env();
    std::fs::write(&env.snap, "nedkit-snapshot\nversion 1\nsha256 00\n{}").unwrap();
    let o = evaluate(&env, "eval_perfect.jsonl", &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn in_process_run_matches_binary() {
    let env = saadi_env();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = nedkit::cli::run(
        [
            "nedkit",
            "disambiguate",
            "--snapshot",
            p(&env.snap),
            "--input",
            p(&fixture("saadi_sentence.jsonl")),
            "--verbose-ambiguity",
        ],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert_eq!(
        String::from_utf8(out).unwrap(),
        read_fixture("saadi_sentence.golden.jsonl")
    );
}
