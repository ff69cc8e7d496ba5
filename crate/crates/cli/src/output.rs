//! Rendering of results as json, csv or human-readable text on stdout.
//!
//! CSV and text print every float as `{:.16e}` (17 significant digits). JSON
//! numbers use serde_json's shortest representation that parses back to the
//! same double.

use std::io::Write;

use serde_json::{json, Value};

use crate::config::Settings;
use crate::exit::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Human,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "human" => Ok(Format::Human),
            other => Err(format!(
                "unknown format {other:?} (expected json, csv or human)"
            )),
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report<'a> {
    pub command: &'a str,
    pub config: &'a Settings,
    pub result: Value,
    pub table: Table,
    /// Summary lines for the human format.
    pub human: Vec<(String, String)>,
}

pub fn emit(report: &Report<'_>, format: Format) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |e: std::io::Error| Failure::data(format!("cannot write output: {e}"));
    match format {
        Format::Json => {
            let doc = json!({
                "command": report.command,
                "config": report.config.as_map(),
                "result": report.result,
            });
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Failure::data(format!("cannot serialize output: {e}")))?;
            writeln!(out, "{text}").map_err(io)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| Failure::data(format!("cannot write csv: {e}"));
            w.write_record(&report.table.header).map_err(csv_err)?;
            for row in &report.table.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        Format::Human => {
            writeln!(out, "{}", report.command).map_err(io)?;
            for (k, v) in report.config.as_map() {
                writeln!(out, "  config.{k} = {v}").map_err(io)?;
            }
            let width = report.human.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in &report.human {
                writeln!(out, "{k:>width$}  {v}").map_err(io)?;
            }
        }
    }
    Ok(())
}
