use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

use schlicht_cli::{exit_code, parse_manifest, run_manifest, to_pretty, Options, Status, SHIPPED_MANIFEST};

fn schlicht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schlicht"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn reports(out: &Output) -> Vec<Value> {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("schlicht-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

const MIXED_FORM: &str = r#"{"h": [[[2.0, 0.0]]], "s": [[[1.0, 0.0]]]}"#;

#[test]
fn classifier_incompatible_meets_expectation() {
    let out = schlicht(&[
        "classify",
        "--form",
        MIXED_FORM,
        "--expect",
        r#"{"verdicts": {"verdict": "Incompatible"}}"#,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = reports(&out);
    assert_eq!(r[0]["verdicts"]["verdict"], "Incompatible");
    assert_eq!(r[0]["verdicts"]["evidence"]["rank_s"], 1);
}

#[test]
fn wrong_expectation_exits_two() {
    let out = schlicht(&[
        "classify",
        "--form",
        MIXED_FORM,
        "--expect",
        r#"{"verdicts": {"verdict": "HermitianCase"}}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(reports(&out)[0]["status"], "mismatch");
}

#[test]
fn sqrt_loop_reports_multivalued() {
    let out = schlicht(&[
        "continue",
        "--germ",
        r#"{"kind": "named", "name": "sqrt_at", "center": [1.0, 0.0]}"#,
        "--path",
        r#"{"kind": "circle", "center": [0.0, 0.0], "radius": 1.0}"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = &reports(&out)[0]["verdicts"];
    let m = [v["monodromy"][0].as_f64().unwrap(), v["monodromy"][1].as_f64().unwrap()];
    assert!((m[0] + 2.0).abs() < 1e-9 && m[1].abs() < 1e-9, "{m:?}");
    assert_eq!(v["multivalued"], true);
}

#[test]
fn loop_around_nothing_is_single_valued() {
    let out = schlicht(&[
        "continue",
        "--germ",
        r#"{"kind": "named", "name": "log_at", "center": [3.0, 0.0]}"#,
        "--path",
        r#"{"kind": "circle", "center": [3.0, 0.0], "radius": 1.0}"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(reports(&out)[0]["verdicts"]["multivalued"], false);
}

#[test]
fn path_starting_outside_the_disc_is_input_error() {
    let out = schlicht(&[
        "continue",
        "--germ",
        r#"{"kind": "named", "name": "log_at", "center": [3.0, 0.0]}"#,
        "--path",
        r#"{"kind": "circle", "center": [10.0, 0.0], "radius": 1.0}"#,
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn counterexample_writes_figure_csvs() {
    let dir = scratch("counterexample");
    let out = schlicht(&[
        "counterexample",
        "--out-dir",
        dir.to_str().unwrap(),
        "--expect",
        r#"{"tol": 1e-4, "verdicts": {"hull_certification": "Refuted", "y0_certification": "CertifiedOnSamples", "exit_time": 1.1547005383792517}}"#,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = fs::read_to_string(dir.join("counterexample.figure1_curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("x1,x2"));
    for l in lines {
        let xs: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(xs.len(), 2);
        assert!((xs[1] - (xs[0].powi(3) - xs[0])).abs() < 1e-12);
    }
    assert!(dir.join("counterexample.json").exists());
    assert!(dir.join("timings.json").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn malformed_input_exits_four() {
    let out = schlicht(&["classify", "--form", r#"{"h": [[[1.0, 0.0]]]}"#]);
    assert_eq!(out.status.code(), Some(4));
    let out = schlicht(&["classify", "--form", "/nonexistent/form.json"]);
    assert_eq!(out.status.code(), Some(4));
    // 2x2 hermitian part against a 1x1 harmonic part
    let out = schlicht(&[
        "classify",
        "--form",
        r#"{"h": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]], "s": [[[1.0, 0.0]]]}"#,
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn failed_hypotheses_exit_three() {
    // x has nonzero gradient at the origin, so no model exists
    let out = schlicht(&["thm51", "--rho", r#"{"kind": "named", "name": "x"}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(reports(&out)[0]["status"], "unresolved");
}

#[test]
fn manifest_rejects_duplicate_names_and_unknown_ops() {
    let dup = json!({"scenarios": [{"name": "a", "op": "figure1"}, {"name": "a", "op": "figure1"}]});
    assert!(parse_manifest(dup).is_err());
    let unknown = json!({"scenarios": [{"name": "a", "op": "nope"}]});
    assert!(parse_manifest(unknown).is_err());
    let out = schlicht(&["run-manifest", r#"{"scenarios": [{"name": "a", "op": "nope"}]}"#]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn reports_are_deterministic() {
    let m = parse_manifest(json!({"rng_seed": 9, "scenarios": [
        {"name": "table", "op": "classify_table", "count": 30},
        {"name": "loop", "op": "continue",
         "germ": {"kind": "named", "name": "log_at", "center": [1.0, 0.0]},
         "path": {"kind": "circle", "center": [0.0, 0.0], "radius": 1.0}},
        {"name": "half", "op": "half_space",
         "field": {"kind": "holomorphic", "name": "neg_dx"},
         "domain": {"kind": "slit_plane"},
         "seeds": [[[2.0, 0.0]], [[1.0, 1.0]]]}
    ]}))
    .unwrap();
    let seq = run_manifest(&m, &Options::default()).unwrap();
    let par = run_manifest(
        &m,
        &Options {
            parallel: true,
            ..Options::default()
        },
    )
    .unwrap();
    assert_eq!(to_pretty(&seq), to_pretty(&par));
    assert!(seq.iter().all(|r| r.rng_seed == 9));
}

#[test]
fn seed_changes_random_scenarios_only_through_the_report_seed() {
    let m = parse_manifest(json!({"scenarios": [
        {"name": "t", "op": "classify_table", "count": 12, "rng_seed": 1}
    ]}))
    .unwrap();
    let a = run_manifest(&m, &Options::default()).unwrap();
    let b = run_manifest(
        &m,
        &Options {
            rng_seed: Some(2),
            ..Options::default()
        },
    )
    .unwrap();
    // a scenario's own seed wins over the command-line seed
    assert_eq!(a[0].rng_seed, 1);
    assert_eq!(to_pretty(&a), to_pretty(&b));
}

#[test]
fn shipped_manifest_passes() {
    let m = parse_manifest(serde_json::from_str(SHIPPED_MANIFEST).unwrap()).unwrap();
    let reports = run_manifest(&m, &Options::default()).unwrap();
    for r in &reports {
        assert_eq!(r.status, Status::Ok, "{}: {:?} {:?}", r.scenario, r.error, r.expectation);
    }
    assert_eq!(exit_code(&reports), 0);
    for op in ["counterexample", "figure1", "continue", "half_space", "compactness", "constancy", "rectify", "classify_table", "thm51", "linear"] {
        assert!(reports.iter().any(|r| r.op == op), "shipped manifest lacks {op}");
    }
}

#[test]
fn every_number_carries_a_tolerance() {
    let m = parse_manifest(serde_json::from_str(SHIPPED_MANIFEST).unwrap()).unwrap();
    let reports = run_manifest(&m, &Options::default()).unwrap();
    for r in reports.iter().filter(|r| r.op != "figure1" && r.op != "classify_table") {
        assert!(!r.tolerances.is_empty(), "{} reports no tolerances", r.scenario);
    }
}

#[test]
fn linear_subcommand_takes_seed_points() {
    let out = schlicht(&[
        "linear",
        "--matrix",
        "[[[0,1],[0,0]],[[0,0],[0,2]]]",
        "--points",
        "[[[1,0],[1,0]]]",
        "--seeds",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(reports(&out)[0]["verdicts"]["commensurability"]["kind"], "commensurable");
}
