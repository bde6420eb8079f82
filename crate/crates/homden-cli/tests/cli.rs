//! End-to-end tests of the `homden` binary: exit-code contract, file round
//! trips, and report schemas.

use std::path::Path;
use std::process::{Command, Output};

use homden::{BipartiteGraph, PartiteHypergraph, StepGraphon, VerificationReport};

fn homden(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homden"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn construct_round_trips_through_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = homden(dir.path(), &["construct", "mobius", "--out", "m.json"]);
    assert_eq!(code(&out), 0);
    let graph: BipartiteGraph =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(graph.a_size(), 5);
    assert_eq!(graph.b_count(), 5);
    assert_eq!(graph.edge_count(), 15);

    let out = homden(
        dir.path(),
        &[
            "construct",
            "random-graphon",
            "--seed",
            "11",
            "--blocks",
            "3",
            "--out",
            "w.json",
        ],
    );
    assert_eq!(code(&out), 0);

    let fast = homden(
        dir.path(),
        &["density", "hom", "--graph", "m.json", "--graphon", "w.json"],
    );
    let slow = homden(
        dir.path(),
        &[
            "density", "hom", "--graph", "m.json", "--graphon", "w.json", "--oracle",
        ],
    );
    assert_eq!(code(&fast), 0);
    assert_eq!(stdout(&fast), stdout(&slow));
    assert!(stdout(&fast).trim().contains('/'));
}

#[test]
fn minp_prints_two_for_mobius_kantor() {
    let dir = tempfile::tempdir().unwrap();
    homden(dir.path(), &["construct", "mobius", "--out", "m.json"]);
    let out = homden(dir.path(), &["minp", "m.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "2");
}

#[test]
fn companion_union_meets_divisibility() {
    let dir = tempfile::tempdir().unwrap();
    // A path on three vertices needs company: its degree counts are not
    // multiples of the required binomials.
    homden(
        dir.path(),
        &["construct", "complete", "--a", "2", "--b", "1", "--out", "p.json"],
    );
    let out = homden(dir.path(), &["companion", "p.json", "--out", "c.json"]);
    assert_eq!(code(&out), 0);
    let out = homden(
        dir.path(),
        &["construct", "union", "p.json", "c.json", "--out", "u.json"],
    );
    assert_eq!(code(&out), 0);
    let out = homden(dir.path(), &["minp", "u.json"]);
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn passing_check_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = homden(
        dir.path(),
        &[
            "check",
            "mobius_square",
            "--seed",
            "7",
            "--trials",
            "3",
            "--out",
            "rep.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let report = VerificationReport::from_json(
        &std::fs::read_to_string(dir.path().join("rep.json")).unwrap(),
    )
    .unwrap();
    assert!(report.pass);
    assert_eq!(report.check, "mobius_square");
    assert_eq!(report.trials, 3);
    // Three random trials plus the constant soundness record.
    assert_eq!(report.records.len(), 4);
}

#[test]
fn failing_check_still_writes_report_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = homden(
        dir.path(),
        &[
            "check",
            "negative_control",
            "--seed",
            "5",
            "--trials",
            "2",
            "--out",
            "neg.json",
        ],
    );
    assert_eq!(code(&out), 1);
    let report = VerificationReport::from_json(
        &std::fs::read_to_string(dir.path().join("neg.json")).unwrap(),
    )
    .unwrap();
    assert!(!report.pass);
    assert!(report.records.iter().any(|r| !r.pass));
}

#[test]
fn check_report_prints_to_stdout_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = homden(
        dir.path(),
        &[
            "check",
            "known_sidorenko_sanity",
            "--seed",
            "2",
            "--trials",
            "2",
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("check,seed,trials,"));
    let report = VerificationReport::from_csv(&text).unwrap();
    assert_eq!(report.check, "known_sidorenko_sanity");
    assert!(report.pass);
}

#[test]
fn unknown_check_and_bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = homden(dir.path(), &["check", "bogus", "--trials", "1"]);
    assert_eq!(code(&out), 2);
    let out = homden(dir.path(), &["check"]);
    assert_eq!(code(&out), 2);
    let out = homden(dir.path(), &["frobnicate"]);
    assert_eq!(code(&out), 2);
    let out = homden(dir.path(), &["density", "hom", "--graph", "missing.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn infeasible_construction_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = homden(
        dir.path(),
        &[
            "construct", "h-chain", "--m", "4", "--r", "2", "--alpha", "2,1",
        ],
    );
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("divisible"), "diagnostic was: {err}");
}

#[test]
fn reflect_compare_agrees_with_direct_construction() {
    let dir = tempfile::tempdir().unwrap();
    homden(dir.path(), &["reflect", "g-spec", "--r", "2", "--out", "spec.json"]);
    homden(
        dir.path(),
        &["construct", "g-chain", "--r", "2", "--alpha", "1,1", "--out", "g.json"],
    );
    let out = homden(
        dir.path(),
        &["reflect", "compare", "--spec", "spec.json", "--graph", "g.json"],
    );
    assert_eq!(code(&out), 0);
    let mapping: Vec<Vec<usize>> = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(mapping.len(), 3);

    // A mismatched comparison exits 1.
    homden(
        dir.path(),
        &["construct", "g-chain", "--r", "2", "--alpha", "2,1", "--out", "g2.json"],
    );
    let out = homden(
        dir.path(),
        &["reflect", "compare", "--spec", "spec.json", "--graph", "g2.json"],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn reflect_build_matches_chain_construction_files() {
    let dir = tempfile::tempdir().unwrap();
    homden(
        dir.path(),
        &["reflect", "h-spec", "--m", "3", "--r", "2", "--out", "spec.json"],
    );
    let out = homden(dir.path(), &["reflect", "build", "--spec", "spec.json"]);
    assert_eq!(code(&out), 0);
    let built: PartiteHypergraph = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(built.class_count(), 3);
    assert_eq!(built.edge_count(), 6);
}

#[test]
fn hyper_density_consumes_constructed_kernel() {
    let dir = tempfile::tempdir().unwrap();
    homden(
        dir.path(),
        &["construct", "constant-graphon", "1/2", "--out", "w.json"],
    );
    let w: StepGraphon =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(w.block_count(), 1);
    homden(
        dir.path(),
        &[
            "construct", "kernel", "--graphon", "w.json", "--m", "2", "--r", "2", "--alpha",
            "1,1", "--out", "k.json",
        ],
    );
    homden(
        dir.path(),
        &["construct", "g-chain", "--r", "2", "--alpha", "1,1", "--out", "g.json"],
    );
    let out = homden(
        dir.path(),
        &[
            "density",
            "hyper",
            "--hypergraph",
            "g.json",
            "--kernel",
            "k.json",
        ],
    );
    assert_eq!(code(&out), 0);
    // Two chains of two levels each, all exponents 1, at W = 1/2.
    assert_eq!(stdout(&out).trim(), "1/16");
    let oracle = homden(
        dir.path(),
        &[
            "density",
            "hyper",
            "--hypergraph",
            "g.json",
            "--kernel",
            "k.json",
            "--oracle",
        ],
    );
    assert_eq!(stdout(&oracle).trim(), "1/16");
}

#[test]
fn weighted_density_matches_plain_density_on_downset_weights() {
    let dir = tempfile::tempdir().unwrap();
    homden(
        dir.path(),
        &[
            "construct",
            "random-graphon",
            "--seed",
            "4",
            "--blocks",
            "2",
            "--out",
            "w.json",
        ],
    );
    homden(
        dir.path(),
        &["construct", "downset", "--m", "3", "--r", "2", "--out", "j.json"],
    );
    // Weight 1 on every degree makes the weighted density the plain one.
    let weighted = homden(
        dir.path(),
        &[
            "density", "weighted", "--graph", "j.json", "--graphon", "w.json", "--alpha", "1,1",
        ],
    );
    let plain = homden(
        dir.path(),
        &["density", "hom", "--graph", "j.json", "--graphon", "w.json"],
    );
    assert_eq!(code(&weighted), 0);
    assert_eq!(stdout(&weighted), stdout(&plain));
}
