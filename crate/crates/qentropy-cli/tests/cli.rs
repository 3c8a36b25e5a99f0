//! End-to-end tests of the installed binary: exit codes, report fields,
//! output formats, and determinism.

use std::path::Path;
use std::process::{Command, Output};

use qentropy::{Complex64, ComplexMatrix, Ensemble, LabeledState, SubsystemLayout, LN_2};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qentropy"))
        .args(args)
        .env_remove("QENTROPY_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn bell_state() -> LabeledState {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let layout = SubsystemLayout::new(vec![("a", 2), ("b", 2)]).unwrap();
    LabeledState::new(layout, ComplexMatrix::outer(&[r, zero, zero, r])).unwrap()
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

#[test]
fn check_reports_batch_passes() {
    let out = run(&[
        "check", "--ids", "mi_nonneg", "--trials", "10", "--seed", "7", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "qentropy-report/1");
    assert_eq!(report["batches"][0]["id"], "mi_nonneg");
    assert_eq!(report["batches"][0]["pass_count"], 10);
}

#[test]
fn check_records_min_margin() {
    let out = run(&[
        "check", "--ids", "araki_lieb", "--trials", "1000", "--dims", "2,2", "--seed", "1",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let min_margin = report["batches"][0]["min_margin"].as_f64().unwrap();
    assert!(min_margin >= -1e-9, "min margin {min_margin}");
}

#[test]
fn check_rejects_bad_configs() {
    let out = run(&["check", "--ids", "all", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["check", "--ids", "definitely_not_a_check"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("definitely_not_a_check"), "stderr: {stderr}");

    let out = run(&["check", "--ids", "mi_nonneg", "--dims", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn entropy_evaluates_bell_state_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.json");
    write(&path, &bell_state().to_json());
    let out = run(&[
        "entropy", "--state", path.to_str().unwrap(), "--quantities", "S(a),S(a,b),S(a:b)",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let values = report["values"].as_array().unwrap();
    let expected = [LN_2, 0.0, 2.0 * LN_2];
    for (value, want) in values.iter().zip(expected) {
        let nats = value["nats"].as_f64().unwrap();
        let bits = value["bits"].as_f64().unwrap();
        assert!((nats - want).abs() < 1e-9, "{} = {nats}", value["query"]);
        assert!((bits - want / LN_2).abs() < 1e-9);
    }
}

#[test]
fn entropy_prints_both_units() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.json");
    write(
        &path,
        r#"{"layout":[{"label":"a","dim":2}],"matrix":[0.5,0,0,0,0,0,0.5,0]}"#,
    );
    let out = run(&["entropy", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0.6931 nats"), "stdout: {stdout}");
    assert!(stdout.contains("1.0000 bits"), "stdout: {stdout}");
}

#[test]
fn entropy_distinguishes_parse_and_invariant_failures() {
    let dir = tempfile::tempdir().unwrap();

    let garbled = dir.path().join("garbled.json");
    write(&garbled, "not a state {{");
    let out = run(&["entropy", "--state", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    let out = run(&["entropy", "--state", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let non_psd = dir.path().join("non_psd.json");
    write(
        &non_psd,
        r#"{"layout":[{"label":"a","dim":2}],"matrix":[1.5,0,0,0,0,0,-0.5,0]}"#,
    );
    let out = run(&["entropy", "--state", non_psd.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("-5.000e-1"), "stderr: {stderr}");

    let unknown_label = dir.path().join("mixed.json");
    write(
        &unknown_label,
        r#"{"layout":[{"label":"a","dim":2}],"matrix":[0.5,0,0,0,0,0,0.5,0]}"#,
    );
    let out = run(&[
        "entropy", "--state", unknown_label.to_str().unwrap(), "--quantities", "S(zz)",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn holevo_presets_hit_their_closed_forms() {
    let out = run(&[
        "holevo-demo", "--preset", "orthogonal", "--samples", "4", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!((report["hol"].as_f64().unwrap() - LN_2).abs() < 1e-9);
    assert!(report["gap"].as_f64().unwrap().abs() < 1e-9);

    let out = run(&[
        "holevo-demo", "--preset", "zero-plus", "--samples", "12", "--seed", "3", "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!((report["hol"].as_f64().unwrap() - 0.4165).abs() < 1e-3);
    assert!(report["gap"].as_f64().unwrap() > 0.1);
    assert_eq!(report["per_sample"].as_array().unwrap().len(), 12);
}

#[test]
fn holevo_demo_reads_ensemble_files() {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let layout = SubsystemLayout::single("q", 2).unwrap();
    let states = vec![
        LabeledState::new(
            layout.clone(),
            ComplexMatrix::outer(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
        )
        .unwrap(),
        LabeledState::new(layout, ComplexMatrix::outer(&[r, r])).unwrap(),
    ];
    let ensemble = Ensemble::new(vec![0.5, 0.5], states, "x").unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ensemble.json");
    write(&path, &ensemble.to_json());

    let out = run(&[
        "holevo-demo", "--ensemble", path.to_str().unwrap(), "--samples", "6", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!((report["hol"].as_f64().unwrap() - 0.4165).abs() < 1e-3);

    let garbled = dir.path().join("garbled.json");
    write(&garbled, "[not an ensemble");
    let out = run(&["holevo-demo", "--ensemble", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rum_emits_table_and_verdicts() {
    let out = run(&["rum", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("S({1}) = 1.000000000000"), "stdout: {stdout}");
    assert!(stdout.contains("S({1,2}) = 0.000000000000"), "stdout: {stdout}");
    assert!(stdout.contains("rum_negative_conditional"), "stdout: {stdout}");

    let out = run(&["rum", "--n", "8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["subsets"].as_array().unwrap().len(), 255);
    assert!(report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v["holds"].as_bool().unwrap()));
}

#[test]
fn rum_rejects_out_of_range_sizes() {
    assert_eq!(run(&["rum", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["rum", "--n", "20"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "check", "--ids", "cmi_nonneg,dp_single_graph", "--trials", "25", "--seed", "11",
        "--format", "json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);

    let args = ["holevo-demo", "--samples", "16", "--seed", "2", "--format", "json"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn out_flag_writes_the_report_to_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "check", "--ids", "mi_nonneg", "--trials", "5", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["schema"], "qentropy-report/1");
}

#[test]
fn env_seed_is_the_default_but_the_flag_wins() {
    let base = ["check", "--ids", "mi_nonneg", "--trials", "3", "--format", "json"];
    let out = Command::new(env!("CARGO_BIN_EXE_qentropy"))
        .args(base)
        .env("QENTROPY_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["seed"], 9);

    let out = Command::new(env!("CARGO_BIN_EXE_qentropy"))
        .args(base)
        .arg("--seed")
        .arg("3")
        .env("QENTROPY_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["seed"], 3);
}
