//! Command-line behaviour: outputs, exit statuses and determinism.

use std::fs;
use std::path::{Path, PathBuf};

use heliflow::background::{critical_step, reference_inflow, solve_background};
use heliflow::config::RunConfig;
use heliflow_cli::{run_cli_with, EXIT_OK, EXIT_VALIDATION};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("heliflow").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn sigma_star() -> f64 {
    critical_step(&solve_background(reference_inflow(), 1024).unwrap()).unwrap().sigma_star
}

fn write_config(dir: &Path, name: &str, cfg: &RunConfig) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, cfg.to_json()).unwrap();
    p
}

fn small_config(dir: &Path) -> PathBuf {
    write_config(dir, "small.json", &RunConfig::reference(0.5 * sigma_star(), 1e-3, 33, 16))
}

#[test]
fn sigma_star_prints_one_json_line() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let r = run(&["sigma-star", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out.lines().count(), 1);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    for key in ["sigma_star", "argmin_radius", "r_c"] {
        assert!(v[key].as_f64().unwrap() > 0.0, "{key} missing in {}", r.out);
    }
}

#[test]
fn solve_writes_flow_and_report() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let (csv, rep) = (dir.path().join("flow.csv"), dir.path().join("report.json"));
    let r = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let report: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["converged"], Value::Bool(true));
    assert_eq!(report["n_r"].as_u64(), Some(33));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 33 * 16);
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let outputs: Vec<(String, Vec<u8>)> = (0..2)
        .map(|k| {
            let csv = dir.path().join(format!("flow{k}.csv"));
            let r = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
            assert_eq!(r.code, EXIT_OK, "{}", r.err);
            (r.out, fs::read(&csv).unwrap())
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn oversized_step_exits_with_validation_status() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "big.json", &RunConfig::reference(1.1 * sigma_star(), 1e-3, 33, 16));
    let r = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_VALIDATION);
    assert!(r.err.contains("helical.sigma"), "{}", r.err);
}

#[test]
fn unknown_keys_and_commands_are_rejected() {
    let dir = TempDir::new().unwrap();
    let text = RunConfig::reference(5.0, 1e-3, 33, 16).to_json().replacen("\"gamma\"", "\"gama\"", 1);
    let p = dir.path().join("typo.json");
    fs::write(&p, text).unwrap();
    let r = run(&["solve", "--config", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_VALIDATION);
    assert!(r.err.contains("gama"), "{}", r.err);

    assert_eq!(run(&["integrate"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["solve"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--help"]).code, EXIT_OK);
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let r = run(&["sigma-star", "--config", "/nonexistent/heliflow.json"]);
    assert_eq!(r.code, EXIT_VALIDATION);
    assert!(r.err.starts_with("error: "), "{}", r.err);
}

#[test]
fn background_csv_has_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let r = run(&["background", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let mut lines = r.out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "r");
    assert!(header.contains(&"k22"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 33);
    assert!(rows.iter().all(|l| l.split(',').count() == header.len()));
}

#[test]
fn mms_reports_requested_levels() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let r = run(&["mms", "--config", cfg.to_str().unwrap(), "--refine", "1"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 1);
    assert_eq!(run(&["mms", "--config", cfg.to_str().unwrap(), "--refine", "0"]).code, EXIT_VALIDATION);
}

#[test]
fn scaling_reports_one_row_per_amplitude() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let r = run(&["scaling", "--config", cfg.to_str().unwrap(), "--eps", "0,1e-4,1e-3"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["ratios"], Value::Null);
}

#[test]
fn verify_writes_a_passing_ledger() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let rep = dir.path().join("verify.json");
    let r = run(&["verify", "--config", cfg.to_str().unwrap(), "--report", rep.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["pass"] != Value::Bool(true)).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(r.code, EXIT_OK);
}
