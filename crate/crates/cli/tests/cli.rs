//! End-to-end tests of the `gripper` binary: exit codes, output files,
//! and the manifest digests that make runs archivable.

use std::path::Path;
use std::process::{Command, Output};

use gripper_core::trace::TRACE_HEADER;
use gripper_core::tune::FEASIBILITY_HEADER;
use sha2::{Digest, Sha256};

fn gripper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gripper"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

/// Every `file <name> bytes=<n> sha256=<hex>` manifest line must match the
/// file actually sitting next to it.
fn verify_manifest(dir: &Path) -> usize {
    let manifest = read(dir, "manifest.txt");
    assert!(
        manifest.starts_with("tool = gripper "),
        "manifest should name the tool: {manifest}"
    );
    assert!(manifest.contains("\nseed = "), "manifest should record the seed");
    let mut checked = 0;
    for line in manifest.lines().filter(|l| l.starts_with("file ")) {
        let mut parts = line.split_whitespace();
        parts.next();
        let name = parts.next().expect("file name");
        let bytes: usize = parts
            .next()
            .and_then(|f| f.strip_prefix("bytes="))
            .expect("bytes field")
            .parse()
            .expect("byte count");
        let sha = parts
            .next()
            .and_then(|f| f.strip_prefix("sha256="))
            .expect("sha256 field");
        let content = std::fs::read(dir.join(name)).expect("manifest names a written file");
        assert_eq!(content.len(), bytes, "{name}: manifest byte count");
        assert_eq!(
            format!("{:x}", Sha256::digest(&content)),
            sha,
            "{name}: manifest digest"
        );
        checked += 1;
    }
    checked
}

#[test]
fn simulate_closing_writes_verifiable_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let res = gripper(&["simulate", "--scenario", "closing", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr_of(&res));

    for name in ["trace.csv", "events.csv", "meta.txt", "manifest.txt"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let trace = read(&out, "trace.csv");
    assert_eq!(trace.lines().next(), Some(TRACE_HEADER));
    assert!(trace.lines().count() > 10_000, "closing run should be long");
    assert_eq!(verify_manifest(&out), 3, "manifest should cover the other three files");
}

#[test]
fn same_seed_reproduces_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let res = gripper(&[
            "simulate",
            "--scenario",
            "chatter",
            "--seed",
            "7",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0), "{}", stderr_of(&res));
    }
    assert_eq!(read(&a, "trace.csv"), read(&b, "trace.csv"));
    assert_eq!(read(&a, "events.csv"), read(&b, "events.csv"));
}

#[test]
fn unknown_scenario_fails_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let res = gripper(&["simulate", "--scenario", "nope", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr_of(&res).contains("presets:"), "should list the presets");
    assert!(!out.exists(), "failed runs must not leave partial outputs");
}

#[test]
fn invalid_parameter_file_is_rejected_before_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = tmp.path().join("bad.scn");
    std::fs::write(&scn, "tau_pre_kn = 0.5\n").unwrap();
    let out = tmp.path().join("never");
    let res = gripper(&[
        "simulate",
        "--scenario",
        scn.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3), "{}", stderr_of(&res));
    assert!(stderr_of(&res).contains("exceeds static ceiling"));
    assert!(!out.exists());
}

#[test]
fn scenario_parse_errors_name_the_location() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = tmp.path().join("typo.scn");
    std::fs::write(&scn, "lambduh = 3\n").unwrap();
    let res = gripper(&["simulate", "--scenario", scn.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err = stderr_of(&res);
    assert!(err.contains("line 1") && err.contains("lambduh"), "got: {err}");
}

#[test]
fn control_soft_touch_reports_phases_and_stop() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let res = gripper(&["control", "--scenario", "soft_touch", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr_of(&res));

    for name in ["trace.csv", "events.csv", "log.txt", "summary.txt", "meta.txt", "manifest.txt"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let summary = read(&out, "summary.txt");
    assert!(
        summary.contains("phases = bending -> grasping -> done"),
        "got: {summary}"
    );
    assert!(summary.contains("stop = controller_stop"), "got: {summary}");
    assert_eq!(verify_manifest(&out), 5);
}

#[test]
fn control_goal_beyond_switching_threshold_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let res = gripper(&[
        "control",
        "--scenario",
        "soft_touch",
        "--goal-f-tip",
        "45",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4), "{}", stderr_of(&res));
    assert!(stderr_of(&res).contains("switching threshold"));
    assert!(!out.exists());
}

#[test]
fn tune_writes_one_row_per_grid_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("grid");
    let res = gripper(&[
        "tune",
        "--lambda",
        "20:40:3",
        "--t-scw",
        "0.3:0.9:4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr_of(&res));
    let csv = read(&out, "feasibility.csv");
    assert_eq!(csv.lines().next(), Some(FEASIBILITY_HEADER));
    assert_eq!(csv.lines().count(), 1 + 3 * 4);
    verify_manifest(&out);
}

#[test]
fn infeasible_tune_still_writes_the_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("grid");
    let res = gripper(&[
        "tune",
        "--lambda",
        "20:40:3",
        "--t-scw",
        "0.3:0.9:4",
        "--chatter-safety",
        "99",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert!(stderr_of(&res).contains("no feasible design point"));
    assert!(out.join("feasibility.csv").is_file(), "sweep data must survive an infeasible search");
    assert!(out.join("manifest.txt").is_file());
}

#[test]
fn scenarios_lists_every_preset() {
    let res = gripper(&["scenarios"]);
    assert_eq!(res.status.code(), Some(0));
    let listing = String::from_utf8_lossy(&res.stdout).into_owned();
    for name in [
        "closing",
        "chatter",
        "steep",
        "clutch_bench",
        "clutch_bench_tight",
        "clutch_bench_loose",
        "handback",
        "retrieve",
        "retrieve_short",
        "retrieve_near",
        "retrieve_far",
        "soft_touch",
        "release",
    ] {
        assert!(listing.contains(name), "listing should mention {name}");
    }
}
