//! The `heleshaw` binary: exit codes, output headers and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use heleshaw::config::ExperimentConfig;
use heleshaw::experiment::{config_hash, VERSION};

fn heleshaw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heleshaw"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn validate_default_succeeds() {
    let d = tempfile::tempdir().unwrap();
    let o = heleshaw(&["validate"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("validate.csv").exists());
}

#[test]
fn validate_zero_flux_is_a_domain_failure() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&heleshaw(&["validate", "--preset", "zero"], d.path())), 1);
}

#[test]
fn config_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.toml");
    fs::write(&bad, "name = [unclosed").unwrap();
    let o = heleshaw(&["validate", "--config", bad.to_str().unwrap()], d.path());
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
    assert_eq!(code(&heleshaw(&["validate", "--preset", "nope"], d.path())), 2);
    let neg = d.path().join("neg.toml");
    let mut cfg = ExperimentConfig::preset("default").unwrap();
    cfg.flux.gamma = -1.0;
    fs::write(&neg, cfg.to_toml()).unwrap();
    assert_eq!(
        code(&heleshaw(&["validate", "--config", neg.to_str().unwrap()], d.path())),
        2
    );
}

#[test]
fn converge_needs_three_eps() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&heleshaw(&["converge", "--eps", "0.2"], d.path())), 1);
}

#[test]
fn config_round_trips_through_the_binary() {
    let d = tempfile::tempdir().unwrap();
    let o = heleshaw(&["config", "--preset", "lateral-only"], d.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let parsed = ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(parsed.name, "lateral-only");
}

#[test]
fn headers_carry_version_and_hash() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&heleshaw(&["kernel-check"], d.path())), 0);
    let hash = config_hash(&ExperimentConfig::preset("default").unwrap());
    for (name, bytes) in snapshot(d.path()) {
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("# heleshaw {VERSION}"), "{name}");
        assert_eq!(lines.next().unwrap(), "# command: kernel-check", "{name}");
        assert_eq!(
            lines.next().unwrap(),
            format!("# config: default sha256 {hash}"),
            "{name}"
        );
    }
}

#[test]
fn reruns_are_byte_identical() {
    let runs: [&[&str]; 4] = [
        &["kernel-check"],
        &["validate"],
        &["asymptotics", "--eps", "0.2,0.1", "--t-nodes", "5"],
        &["solve", "--eps", "0.2", "--n1", "33", "--t-nodes", "3"],
    ];
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(code(&heleshaw(args, a.path())), 0, "{args:?}");
        assert_eq!(code(&heleshaw(args, b.path())), 0, "{args:?}");
        let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
        assert!(!sa.is_empty());
        assert!(sa == sb, "{args:?} outputs differ");
    }
}
