//! End-to-end runs of the `levyhom` binary: exit codes and artifacts.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn base_config(coefficient: Value) -> Value {
    json!({
        "dimension": 1,
        "alpha": 0.5,
        "coefficient": coefficient,
        "truncation": 8,
        "xi_grid": {"points_per_dim": 16, "radial_min_exp": -4.0, "radial_max_exp": -0.5,
                    "radial_count": 6, "diagonals": true, "boundary": true},
        "grid_check": false,
        "epsilon": {"min": 0.001, "max": 0.1, "count": 10, "log_spacing": true},
        "tolerances": {"oracle_rel": 0.001, "projector_abs": 1e-8, "slope_margin": 0.1},
        "positivity_grid": 256,
        "seed": 3,
        "threshold_sweep": {"xi_min": 0.001, "xi_max": 0.1, "count": 12},
        "oracle": {"truncation": 2, "xi": [0.3, 1.0], "alphas": [0.5, 1.5]}
    })
}

fn product_cosine() -> Value {
    json!([
        {"k": [0], "l": [0], "re": 1.0, "im": 0.0},
        {"k": [1], "l": [1], "re": 0.125, "im": 0.0},
        {"k": [1], "l": [-1], "re": 0.125, "im": 0.0},
        {"k": [-1], "l": [1], "re": 0.125, "im": 0.0},
        {"k": [-1], "l": [-1], "re": 0.125, "im": 0.0}
    ])
}

fn constant() -> Value {
    json!([{"k": [0], "l": [0], "re": 1.0, "im": 0.0}])
}

fn write_config(dir: &Path, config: &Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn levyhom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levyhom")).args(args).output().unwrap()
}

fn run(config: &Path, out: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    levyhom(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_constant_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config(constant()));
    let o = run(&cfg, dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate_report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["mu_minus"], json!(1.0));
    assert_eq!(report["summary"]["mu_plus"], json!(1.0));
    assert_eq!(report["command"], json!("validate"));
}

#[test]
fn asymmetric_coefficient_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let coefficient = json!([
        {"k": [0], "l": [0], "re": 1.0, "im": 0.0},
        {"k": [1], "l": [0], "re": 0.1, "im": 0.0},
        {"k": [-1], "l": [0], "re": 0.1, "im": 0.0}
    ]);
    let cfg = write_config(dir.path(), &base_config(coefficient));
    let o = run(&cfg, dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("exchange symmetry violated"), "{}", stdout(&o));
}

#[test]
fn usage_and_io_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&missing, dir.path(), &["validate"]).status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&bad, dir.path(), &["validate"]).status.code(), Some(1));
    assert_eq!(levyhom(&["validate"]).status.code(), Some(1));
    assert_eq!(levyhom(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(levyhom(&["--help"]).status.code(), Some(0));
}

#[test]
fn fiber_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config(product_cosine()));
    let o = run(
        &cfg,
        dir.path(),
        &["--truncation", "2", "fiber", "--xi", "0.3", "--xi", "-1.0"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(dir.path().join("fiber_1.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2 + 5);
    assert_eq!(lines[0].split(',').count(), 10);
    assert!(lines[0].starts_with("re_0,im_0,"));
    assert!(lines[1].starts_with("# config_digest="));
}

#[test]
fn thresholds_and_oracle_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config(product_cosine()));
    let o = run(&cfg, dir.path(), &["thresholds"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS slope_f_minus_p"));
    let text = std::fs::read_to_string(dir.path().join("thresholds.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 13);

    let o = run(&cfg, dir.path(), &["oracle-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("oracle_check_report.json").exists());
}

#[test]
fn rate_study_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config(product_cosine()));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&cfg, &a, &["--workers", "1", "rate-study"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, &["--workers", "3", "rate-study"]).status.code(), Some(0));
    let first = std::fs::read(a.join("rate_study.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("rate_study.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("epsilon,discrepancy,rate_bound,bound_ratio,argmax_xi_norm\n# config_digest="));
    for footer in ["fitted_slope,", "r_squared,", "truncation_stability,"] {
        assert!(text.lines().any(|l| l.starts_with(footer)), "missing {footer}");
    }
}

#[test]
fn constant_coefficient_rate_study_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config(constant()));
    let o = run(&cfg, dir.path(), &["rate-study"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(dir.path().join("rate_study.csv")).unwrap();
    assert!(text.contains("fitted_slope,exact"));
    assert!(text
        .lines()
        .skip(2)
        .take(10)
        .all(|l| l.split(',').nth(1) == Some("0e0")));
}
