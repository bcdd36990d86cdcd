use std::path::PathBuf;
use std::process::{Command, Output};

use hylo_core::report::Report;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn hylo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hylo"))
        .args(args)
        .env_remove("HYLO_LOG")
        .output()
        .expect("runs hylo")
}

fn fx(name: &str) -> String {
    fixture(name).to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_expectations() {
    let o = hylo(&["check", &fx("tiny.json"), "--expect", "wellfounded=true"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = hylo(&["check", &fx("tiny_loop.json"), "--expect", "wellfounded=true"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("wellfounded: expected true, got false"));

    let o = hylo(&["check", &fx("tiny.json"), "--expect", "no_such_key=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("malformed.json");
    std::fs::write(&path, "{\n  \"functor\": {\"shapes\": [\n}").unwrap();
    let o = hylo(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = hylo(&["check", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_both_ways() {
    let o = hylo(&["solve", &fx("tiny.json"), "--via", "inductive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f = {a0↦b0, a1↦b1}"));

    let o = hylo(&["solve", &fx("tiny_loop.json"), "--via", "coinductive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f = {a0↦[b0], a1↦[b1]}"));
    assert!(!stderr(&o).contains("warning"));

    let o = hylo(&["solve", &fx("modsucc2.json"), "--via", "coinductive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f = {a↦[0, 1]}"));
    assert!(stdout(&o).contains("1 classes"));
    assert!(stderr(&o).contains("warning: the plain equation has no solutions"));
}

#[test]
fn solve_json() {
    let o = hylo(&["solve", &fx("tiny_loop.json"), "--via", "inductive", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["table"], serde_json::json!([["a0", "b0"]]));
    assert_eq!(v["undefined"], serde_json::json!(["a1"]));
}

#[test]
fn oracle_counts() {
    let o = hylo(&["oracle", &fx("tiny.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("solutions: 1\n"));

    let o = hylo(&["oracle", &fx("identity12.json"), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 2);

    let o = hylo(&["oracle", &fx("qsort_k3n4.json")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget exceeded"));
}

#[test]
fn unfold_and_productivity() {
    let o = hylo(&["unfold", &fx("dropeven.codata"), "--target", "f(arith(0,1))", "--depth", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 2 4 6 8 10 12 14\n");

    let o = hylo(&["unfold", &fx("smerge.codata"), "--target", "f(g)", "--path", "tl.tl.hd"]);
    assert_eq!(stdout(&o), "0\n");

    let o = hylo(&["unfold", &fx("bad_loop.codata"), "--target", "bad(arith(0,1))", "--depth", "1", "--fuel", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FuelExhausted"));

    let o = hylo(&["productivity", &fx("bad_loop.codata"), "--target", "bad(arith(0,1))", "--depth", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("guarded: false"));

    let o = hylo(&["productivity", &fx("smerge.codata"), "--target", "f(g)", "--depth", "32", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["guardedness"]["guarded"], true);
    assert_eq!(v["probe"]["ok"], true);

    let o = hylo(&["unfold", &fx("dropeven.codata"), "--target", "f(nope)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qsort34.json");
    let o = hylo(&["gen", "qsort", "--el", "3", "--maxlen", "4", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = hylo(&["check", out.to_str().unwrap(), "--expect", "wellfounded=true", "--expect", "size_a=121"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(fixture("qsort_k3n4.json")).unwrap());

    for (args, name) in [
        (vec!["gen", "isort", "--el", "2", "--maxlen", "3"], "isort_k2n3.json"),
        (vec!["gen", "modsucc", "--modulus", "2"], "modsucc2.json"),
        (vec!["gen", "identity", "--domain", "1", "--codomain", "2"], "identity12.json"),
    ] {
        let o = hylo(&args);
        assert_eq!(o.stdout, std::fs::read(fixture(name)).unwrap(), "{name}");
    }
}

#[test]
fn json_reports_match_golden_files() {
    for (name, golden) in [
        ("tiny.json", include_str!("golden/tiny_check.json")),
        ("modsucc2.json", include_str!("golden/modsucc2_check.json")),
    ] {
        let o = hylo(&["check", &fx(name), "--json", "--oracle", "4"]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), golden, "{name}");
        let parsed = Report::from_json(golden).unwrap();
        assert_eq!(parsed.schema_version, 1);
        assert_eq!(parsed.to_json(), golden);
    }
}

#[test]
fn json_is_stable_across_runs() {
    for name in ["tiny_loop.json", "isort_k2n3.json", "identity12.json"] {
        let a = hylo(&["check", &fx(name), "--json", "--oracle", "8"]);
        let b = hylo(&["check", &fx(name), "--json", "--oracle", "8"]);
        assert_eq!(a.stdout, b.stdout);
    }
    let t = hylo(&["check", &fx("tiny.json"), "--json", "--timings"]);
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert!(v["timings_ms"].is_object());
}

#[test]
fn text_output_elides_long_relations() {
    let o = hylo(&["check", &fx("isort_k2n3.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("bisimilarity ≈ ("));
    let o = hylo(&["check", &fx("qsort_k3n4.json")]);
    let text = stdout(&o);
    assert!(text.contains("dom (element: rank) (121):"));
    assert!(text.contains("  ... 71 more"));
}

#[test]
fn campaign_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("campaign.json");
    std::fs::write(
        &path,
        r#"{"seed": 7, "generators": [
            {"kind": "exhaustive", "profile": [0, 1], "size_a": 2, "size_b": 2},
            {"kind": "random", "profile": [0, 2], "size_a": 3, "size_b": 3, "count": 50}
        ]}"#,
    )
    .unwrap();
    let run = || hylo(&["campaign", "--config", path.to_str().unwrap(), "--json"]);
    let a = run();
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, run().stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["failures_total"], 0);

    std::fs::write(&path, r#"{"seed": "x"}"#).unwrap();
    assert_eq!(run().status.code(), Some(2));
}
