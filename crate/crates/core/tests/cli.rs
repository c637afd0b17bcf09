use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transeig"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn small_config(dir: &tempfile::TempDir, steps: usize) -> PathBuf {
    let path = dir.path().join("problem.json");
    let body = serde_json::json!({
        "problem": "helmholtz",
        "domain": {"interval_union": {"intervals": [[-std::f64::consts::PI, std::f64::consts::PI]]}},
        "potential": {"constant": {"v0": 0.75}},
        "discretization": {"cells_per_interval": 24, "num_curves": 6},
        "sweep": {"lambda_min": 0.5, "lambda_max": 10.0, "steps": steps}
    });
    std::fs::write(&path, body.to_string()).unwrap();
    path
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn missing_config_is_a_config_error() {
    let out = run(&["find", "--config", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn radial_reports_the_double_root() {
    let out = run(&[
        "radial",
        "--problem",
        "helmholtz",
        "--dim",
        "1",
        "--radius",
        "3.141592653589793",
        "--v0",
        "0.75",
        "--lmax",
        "1",
        "--lambda-max",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let lambdas: Vec<f64> = v["transmission_eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["lambda"].as_f64().unwrap())
        .collect();
    assert!(
        lambdas.iter().any(|l| (l - 4.0).abs() < 1e-8),
        "{lambdas:?}"
    );
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir, 2);
    let csv = dir.path().join("curves.csv");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out-curves",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "lambda,mu_1,mu_2,mu_3,mu_4,mu_5,mu_6");
    assert_eq!(lines[1].split(',').count(), 7);
}

#[test]
fn sweep_with_report_and_unwritable_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir, 100);
    let csv = dir.path().join("curves.csv");
    let report = dir.path().join("report.json");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out-curves",
        csv.to_str().unwrap(),
        "--out-report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["metadata"]["dimension"], 23);

    let out = run(&[
        "find",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        "/nonexistent/dir/out.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "io");
}

#[test]
fn find_is_byte_identical_across_runs() {
    let path = config("interval_helmholtz.json");
    let a = run(&["find", "--config", path.to_str().unwrap()]);
    let b = run(&["find", "--config", path.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn experiments_exit_with_their_verdict() {
    let out = run(&["scaling", "--dim", "1", "--eps", "0.5,0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "pass");

    let out = run(&["hypothesis", "--lambda-max", "20", "--steps", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "report_only");

    let out = run(&[
        "count",
        "--dim",
        "1",
        "--x",
        "50,100,200,400",
        "--slope-tol",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_experiment_input_is_a_runtime_error() {
    let out = run(&["scaling", "--v0", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "runtime");
}

fn malformed() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z{}:,\"\\[\\] ]{0,40}",
        Just(r#"{"problem": "helmholtz"}"#.to_string()),
        (-2.0f64..0.0).prop_map(|v| format!(
            r#"{{"problem":"helmholtz","domain":{{"interval_union":{{"intervals":[[0,1]]}}}},"potential":{{"constant":{{"v0":{v}}}}},"sweep":{{"lambda_min":1,"lambda_max":2,"steps":10}}}}"#
        )),
        (0usize..4).prop_map(|c| format!(
            r#"{{"problem":"schrodinger","domain":{{"interval_union":{{"intervals":[[0,1]]}}}},"potential":{{"constant":{{"v0":1}}}},"discretization":{{"cells_per_interval":{c}}},"sweep":{{"lambda_min":1,"lambda_max":2,"steps":10}}}}"#
        )),
        Just(r#"{"problem":"helmholtz","domain":{"interval_union":{"intervals":[[0,2],[1,3]]}},"potential":{"constant":{"v0":0.5}},"sweep":{"lambda_min":1,"lambda_max":2,"steps":10}}"#.to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_configs_exit_two(text in malformed()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, &text).unwrap();
        let out = run(&["find", "--config", path.to_str().unwrap()]);
        prop_assert_eq!(out.status.code(), Some(2));
        prop_assert_eq!(error_kind(&out), "config");
    }
}
