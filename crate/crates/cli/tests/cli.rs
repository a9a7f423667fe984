use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

/// Runs `omex` with a whitespace-separated argument line.
fn omex(line: &str, dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omex"))
        .args(line.split_whitespace())
        .current_dir(dir)
        .env_remove("OMEX_LIMITS")
        .output()
        .expect("spawn omex")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

const COUNTEREXAMPLE: &str = r#"{"n": 2, "right_size": 2, "max_degree": 2, "neighbors": [[0], [0, 1], [1]]}"#;

fn with_counterexample() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.json"), COUNTEREXAMPLE).unwrap();
    dir
}

#[test]
fn hall_holds_on_counterexample() {
    let dir = with_counterexample();
    let out = omex("offline hall --graph g.json --s 2", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["ok"], true);
    assert_eq!(r["outcome"]["verdict"]["verdict"], "ok");
}

#[test]
fn hall_fails_at_three() {
    let dir = with_counterexample();
    let out = omex("offline hall --graph g.json --s 3 --checker matching", dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["outcome"]["verdict"]["set"], serde_json::json!([0, 1, 2]));
}

#[test]
fn no_online_strategy_on_counterexample() {
    let dir = with_counterexample();
    let out = omex("online game --graph g.json --s 2", dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["outcome"]["exists"], false);
}

#[test]
fn dangerous_demo_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = omex("demo lemma1 --n 3 --k 1 --eps 1/2 --seed 7", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["outcome"]["cases"][0]["two_eps_K"], "2");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(omex("offline hall --bogus", dir.path()).status.code(), Some(2));
    assert_eq!(omex("demo trevisan", dir.path()).status.code(), Some(2));
    let missing = omex("offline hall --graph nope.json --s 1", dir.path());
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.json"));
    let sampled = omex("ext check --view v.json --verifier sampled", dir.path());
    assert_eq!(sampled.status.code(), Some(2));
}

#[test]
fn exhausted_search_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = omex("trev design --l 2 --m 8 --d 10 --seed 3 --restarts 2", dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["outcome"]["found"], false);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = "ext search --n 3 --k 1 --m 1 --d 3 --eps 1/2 --seed 5";
    let a = omex(args, dir.path());
    let b = omex(args, dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timings_are_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let plain = report(&omex("demo counterexample", dir.path()));
    assert!(plain.get("timings").is_none());
    let timed = report(&omex("--timings demo counterexample", dir.path()));
    assert!(timed["timings"]["elapsed_ms"].is_number());
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = omex("--csv offline bound --n 4 --k 2 --c 2 --exact", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    assert!(text.lines().any(|l| l == "outcome.exact_base,1/18014398509481984"));
    assert!(text.lines().any(|l| l == "ok,true"));
}

#[test]
fn matching_fingerprint_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let gen = omex(
        "offline gen --n 2 --k 1 --c 2 --seed 3 --verify exhaustive --out g.json",
        p,
    );
    assert_eq!(gen.status.code(), Some(0));
    assert_eq!(report(&gen)["artifacts"][0], "g.json");
    fs::write(p.join("s.json"), r#"{"label": "A", "k": 1, "elements": [2, 0]}"#).unwrap();
    for target in ["2", "0"] {
        let enc = omex(
            &format!("fp encode --flavor match --graph g.json --k 1 --set s.json --target {target} --out fp.json"),
            p,
        );
        assert_eq!(enc.status.code(), Some(0));
        assert_eq!(report(&enc)["outcome"]["within_bounds"], true);
        let dec = omex(
            "fp decode --flavor match --graph g.json --k 1 --set s.json --fingerprint fp.json",
            p,
        );
        assert_eq!(dec.status.code(), Some(0));
        let left = report(&dec)["outcome"]["recovered"][0]["left"].clone();
        assert_eq!(left.to_string(), target);
    }
}

#[test]
fn extractor_fingerprint_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let stack = omex(
        "ext stack --n 3 --k 2 --m 2 --d 4 --eps 1/4 --seed 9 --out stack.json",
        p,
    );
    assert_eq!(stack.status.code(), Some(0));
    fs::write(p.join("s.json"), r#"{"label": "B", "k": 2, "elements": [5, 1, 7]}"#).unwrap();
    for target in [5, 1, 7] {
        let enc = omex(
            &format!("fp encode --flavor ext --views stack.json --set s.json --target {target} --out fp.json"),
            p,
        );
        assert_eq!(enc.status.code(), Some(0));
        let dec = omex(
            &format!("fp decode --flavor ext --views stack.json --set s.json --fingerprint fp.json --target {target}"),
            p,
        );
        assert_eq!(dec.status.code(), Some(0));
        assert_eq!(report(&dec)["outcome"]["recovered"][0]["left"], target);
    }
}

#[test]
fn hadamard_list_decoding() {
    let dir = tempfile::tempdir().unwrap();
    let out = omex("trev decode --word 0111", dir.path());
    assert_eq!(
        report(&out)["outcome"]["messages"],
        serde_json::json!(["01", "10", "11"])
    );
}

#[test]
fn found_view_checks_out() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let args = "ext search --n 3 --k 1 --m 1 --d 3 --eps 1/2 --seed 5 --out v.json";
    assert_eq!(omex(args, p).status.code(), Some(0));
    let check = report(&omex("ext check --view v.json", p));
    assert_eq!(check["outcome"]["extractor"], true);
    let sampled = omex("ext check --view v.json --verifier sampled --samples 20 --seed 1", p);
    assert_eq!(sampled.status.code(), Some(0));
    assert_eq!(
        report(&sampled)["outcome"]["verdict"]["verdict"],
        "no_counterexample_found"
    );
}
