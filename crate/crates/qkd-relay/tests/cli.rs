//! Smoke tests for the command-line front end, run against the built
//! binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qkd-relay"))
}

#[test]
fn run_is_reproducible_across_invocations() {
    let args = [
        "run",
        "--nodes",
        "4",
        "--slots",
        "5000",
        "--seed",
        "11",
        "--transmittance",
        "0.8",
        "--mode",
        "padding",
    ];
    let first = bin().args(args).output().unwrap();
    let second = bin().args(args).output().unwrap();
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.starts_with("schema = qkd-relay-summary/1"));
    assert!(text.contains("bridged_fraction = "));
}

#[test]
fn enumerate_prints_the_eight_rows() {
    let output = bin().args(["enumerate", "--nodes", "3"]).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("  ")).count(), 8);
    assert!(text.contains("XYX  no key"));
    assert!(text.contains("useful fraction: 3/4"));
}

#[test]
fn sweep_writes_an_index() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        "n_nodes = 3\nslots = 400\nseed = 3\n[sweep]\nn_nodes = [3, 4]\nmode = [\"naive\", \"padding\"]\n",
    )
    .unwrap();
    let output = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let index = std::fs::read_to_string(dir.path().join("out/sweep-index.txt")).unwrap();
    assert_eq!(index.lines().count(), 5, "header plus four children");
}

#[test]
fn config_errors_name_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        "n_nodes = 4\nslots = 10\nseed = 1\ntransmittance = [0.5, 0.5]\n",
    )
    .unwrap();
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("transmittance"), "{err}");
}
