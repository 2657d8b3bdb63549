//! End-to-end tests of the binary: exit-code contract, report
//! determinism and the Bethe-vector cache.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bethe")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str], cache_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    if let Some(dir) = cache_dir {
        cmd.env("BETHE_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn passing_suite_exits_zero() {
    let cfg = fixture("o3-L2.json");
    let out = run(&["yb-check", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report = stdout_json(&out);
    assert_eq!(report["status"], "pass");
    assert!(report["checks"].as_array().unwrap().len() >= 40);
}

#[test]
fn malformed_rational_names_the_field() {
    let dir = tempdir();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"n":1,"L":1,"c":"1","xi":["1/0"],"chi":["1"],"t":[[]],"z":"0","seed":1,"backend":"exact"}"#,
    )
    .unwrap();
    let out = run(&["yb-check", "--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("xi[0]"), "stderr should name the field: {err}");
}

#[test]
fn guard_violations_are_config_errors() {
    let dir = tempdir();
    let path = dir.join("collide.json");
    // t - z = c/2 violates the joint genericity guard.
    std::fs::write(
        &path,
        r#"{"n":1,"L":2,"c":"1","xi":["1/3","-1/3"],"chi":["1"],"t":[["1/2"]],"z":"0","seed":1,"backend":"exact"}"#,
    )
    .unwrap();
    let out = run(&["vacuum", "--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "bethe-cli-test-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bethe_build_cache_round_trip() {
    let cache = tempdir();
    let cfg = fixture("o5-L1.json");
    let first = run(
        &["bethe-build", "--config", cfg.to_str().unwrap()],
        Some(&cache),
    );
    assert_eq!(first.status.code(), Some(0));
    let r1 = stdout_json(&first);
    let v1 = &r1["checks"][1]["details"];
    assert_eq!(v1["cache"], "miss");
    let second = run(
        &["bethe-build", "--config", cfg.to_str().unwrap()],
        Some(&cache),
    );
    let r2 = stdout_json(&second);
    let v2 = &r2["checks"][1]["details"];
    assert_eq!(v2["cache"], "hit");
    assert_eq!(v1["vector"], v2["vector"], "cache round trip must be exact");
    assert_eq!(v1["hash"], v2["hash"]);
    // A corrupt entry triggers recomputation with a warning.
    let entry = cache.join(format!("{}.json", v1["hash"].as_str().unwrap()));
    std::fs::write(&entry, "not json").unwrap();
    let third = run(
        &["bethe-build", "--config", cfg.to_str().unwrap()],
        Some(&cache),
    );
    assert_eq!(third.status.code(), Some(0));
    let r3 = stdout_json(&third);
    assert_eq!(r3["checks"][1]["details"]["cache"], "miss");
    assert!(String::from_utf8_lossy(&third.stderr).contains("corrupt"));
    assert_eq!(r3["checks"][1]["details"]["vector"], v1["vector"]);
}

#[test]
fn cache_key_tracks_inhomogeneities() {
    let cache = tempdir();
    let cfg = fixture("o5-L1.json");
    let out1 = run(
        &["bethe-build", "--config", cfg.to_str().unwrap()],
        Some(&cache),
    );
    let h1 = stdout_json(&out1)["checks"][1]["details"]["hash"]
        .as_str()
        .unwrap()
        .to_string();
    // Same parameters, shifted inhomogeneity: different key.
    let dir = tempdir();
    let moved = dir.join("moved.json");
    std::fs::write(
        &moved,
        r#"{"n":2,"L":1,"c":"1","xi":["2/3"],"chi":["1","1"],"t":[["2/7"],["3/5"]],"z":"-5/11","seed":11,"backend":"exact"}"#,
    )
    .unwrap();
    let out2 = run(
        &["bethe-build", "--config", moved.to_str().unwrap()],
        Some(&cache),
    );
    let h2 = stdout_json(&out2)["checks"][1]["details"]["hash"]
        .as_str()
        .unwrap()
        .to_string();
    assert_ne!(h1, h2);
}

fn strip_timings(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

#[test]
fn reports_are_deterministic_modulo_timings() {
    let cfg = fixture("o5-L1.json");
    for verb in ["action-verify", "central", "recursion-crosscheck"] {
        let a = stdout_json(&run(&[verb, "--config", cfg.to_str().unwrap()], None));
        let b = stdout_json(&run(&[verb, "--config", cfg.to_str().unwrap()], None));
        assert_eq!(strip_timings(a), strip_timings(b), "verb {verb}");
    }
}

#[test]
fn single_pair_action_report_carries_term_table() {
    let cfg = fixture("o5-L1.json");
    let out = run(
        &[
            "action-verify",
            "--config",
            cfg.to_str().unwrap(),
            "--i",
            "0",
            "--j",
            "1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks[0]["name"], "action i=0 j=1");
    assert_eq!(checks[0]["status"], "pass");
    let table = checks
        .iter()
        .find(|c| c["name"] == "term-table")
        .expect("term table present");
    assert!(!table["details"].as_array().unwrap().is_empty());
}

#[test]
fn twisted_action_checks_are_recorded_only() {
    let cfg = fixture("o5-L1-twisted.json");
    let out = run(
        &[
            "action-verify",
            "--config",
            cfg.to_str().unwrap(),
            "--i",
            "0",
            "--j",
            "1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["checks"][0]["status"], "recorded");
}

#[test]
fn spectrum_verb_passes_on_fixtures() {
    for name in ["o3-L2.json", "o5-L1-spectrum.json"] {
        let cfg = fixture(name);
        let out = run(&["spectrum", "--config", cfg.to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let report = stdout_json(&out);
        assert_eq!(report["checks"][0]["name"], "all-converged-roots-pass");
        assert_eq!(report["checks"][0]["status"], "pass");
        let spectrum = &report["checks"][1]["details"];
        assert!(spectrum["converged_roots"].as_u64().unwrap() >= 1, "{name}");
    }
}
