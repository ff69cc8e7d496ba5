use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn resgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resgap"))
        .args(args)
        .env_remove("RESGAP_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn bound_at_reference_point_certifies() {
    let out = resgap(&[
        "bound", "--phi", "0.508949", "--ell", "1.15", "--coeffs", "1,-0.7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!(doc["result"]["g_value"].as_f64().unwrap() >= 1e-5);
    assert_eq!(doc["result"]["certified"], Value::Bool(true));
    assert_eq!(doc["config"]["phi"], "0.508949");
}

#[test]
fn bound_at_zero_is_not_strictly_positive() {
    let out = resgap(&["bound", "--phi", "0", "--ell", "1", "--coeffs", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["g_value"].as_f64(), Some(0.0));
}

#[test]
fn bound_with_flat_weight_below_threshold_is_negative() {
    let out = resgap(&["bound", "--phi", "0.3", "--ell", "1", "--coeffs", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["result"]["g_value"].as_f64().unwrap() < 0.0);
}

#[test]
fn minimize_reproduces_the_threshold() {
    let out = resgap(&[
        "minimize",
        "--ell",
        "1.15",
        "--coeffs",
        "1,-0.7",
        "--range",
        "0.45:0.55",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["result"]["status"], "certified");
    assert!(doc["result"]["phi_star"].as_f64().unwrap() < 0.508949);
}

#[test]
fn minimize_without_crossing_exits_one() {
    let out = resgap(&["minimize", "--range", "0.1:0.2", "--step", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["status"], "no_certificate");
}

#[test]
fn oracle_prints_one_csv_row() {
    let out = resgap(&[
        "oracle", "--L", "1000", "--phi", "0.508949", "--ell", "1.15", "--coeffs", "1,-0.7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "L");
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "1000");
    let ratio: f64 = rows[0][header.iter().position(|h| h == "ratio").unwrap()]
        .parse()
        .unwrap();
    assert!(ratio.is_finite());
}

#[test]
fn oracle_study_reports_flags() {
    let out = resgap(&["oracle", "--L", "500,2000,8000", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["result"]["rows"].as_array().unwrap().len(), 3);
    assert!(doc["result"]["discrepancy_non_increasing"].is_boolean());
    assert!(doc["result"]["fit"]["relative_residual"].is_number());
}

#[test]
fn oracle_rejects_unreachable_length() {
    let out = resgap(&["oracle", "--L", "1"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn optimize_with_budget_one() {
    let out = resgap(&[
        "optimize",
        "--degree",
        "1",
        "--budget",
        "1",
        "--range",
        "0.45:0.55",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let trace = doc["result"]["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 1);
    assert_eq!(trace[0]["ell"].as_f64(), Some(1.15));
}

#[test]
fn zeros_stats_on_small_table() {
    let table = write_temp("# first zeros\n14.134725142\n21.022039639\n25.010857580\n30.424876126\n32.935061588\n37.586178159\n");
    let path = table.path().to_str().unwrap();
    let out = resgap(&["zeros", "stats", "--file", path, "--phi", "0.508949"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    assert_eq!(doc["result"]["gap_count"].as_u64(), Some(5));
    assert_eq!(
        doc["result"]["histogram"]["counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap())
            .sum::<u64>(),
        5
    );
}

#[test]
fn zeros_error_codes() {
    let out = resgap(&["zeros", "stats", "--file", "/nonexistent/zeros.txt"]);
    assert_eq!(out.status.code(), Some(66));
    let bad = write_temp("14.13\n21.02\nnot-a-number\n");
    let out = resgap(&["zeros", "stats", "--file", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = resgap(&["zeros", "stats"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(resgap(&["bound", "--nope"]).status.code(), Some(64));
    assert_eq!(resgap(&["bound", "--phi", "abc"]).status.code(), Some(64));
    assert_eq!(
        resgap(&["bound", "--format", "xml"]).status.code(),
        Some(64)
    );
    assert_eq!(resgap(&[]).status.code(), Some(64));
    assert_eq!(resgap(&["--help"]).status.code(), Some(0));
    let cfg = write_temp("phi=0.5\nunknown=1\n");
    assert_eq!(
        resgap(&["bound", "--config", cfg.path().to_str().unwrap()])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn echoed_config_reproduces_output() {
    let first = resgap(&[
        "bound",
        "--phi",
        "0.47",
        "--ell",
        "1.3",
        "--coeffs",
        "1,-0.5,0.1",
        "--tol",
        "1e-10",
    ]);
    let doc = json(&first);
    let text: String = doc["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| format!("{k}={}\n", v.as_str().unwrap()))
        .collect();
    let cfg = write_temp(&text);
    let second = resgap(&["bound", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.status.code(), second.status.code());
}

#[test]
fn flags_override_config_file() {
    let cfg = write_temp("phi=0.3\nell=1\ncoeffs=1\n");
    let out = resgap(&[
        "bound",
        "--config",
        cfg.path().to_str().unwrap(),
        "--phi",
        "0.6",
    ]);
    let doc = json(&out);
    assert_eq!(doc["config"]["phi"], "0.6");
    assert_eq!(doc["config"]["ell"], "1");
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["minimize", "--range", "0.45:0.55", "--format", "csv"];
    let one = Command::new(env!("CARGO_BIN_EXE_resgap"))
        .args(args)
        .env("RESGAP_THREADS", "1")
        .output()
        .unwrap();
    let many = resgap(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_resgap"))
        .args(args)
        .env("RESGAP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(64));
}
