//! Tabular experiment reports and their CSV/JSON emission.
//!
//! A report is a pure value: suite name, sorted config echo, master seed,
//! column names, rows, and named aggregates. Emission is a deterministic
//! function of that value, so equal reports produce byte-identical files.
//! The wall clock is carried for logging but excluded from both formats,
//! and the worker count never enters a report, so reruns with a different
//! pool size emit the same bytes.

use crate::error::{MmError, Result};
use crate::harness::Config;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Duration;

/// One table cell. Serialized untagged, so JSON shows plain numbers and
/// strings; parsing picks the first variant that fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValue {
    UInt(u64),
    Int(i64),
    Float(f64),
    Text(String),
}

impl CellValue {
    /// CSV field, quoted only when the content requires it.
    fn csv_field(&self) -> String {
        match self {
            CellValue::UInt(v) => v.to_string(),
            CellValue::Int(v) => v.to_string(),
            CellValue::Float(v) => format!("{v}"),
            CellValue::Text(s) => escape_csv(s),
        }
    }
}

impl From<u64> for CellValue {
    fn from(v: u64) -> Self {
        CellValue::UInt(v)
    }
}

impl From<usize> for CellValue {
    fn from(v: usize) -> Self {
        CellValue::UInt(v as u64)
    }
}

impl From<i64> for CellValue {
    fn from(v: i64) -> Self {
        CellValue::Int(v)
    }
}

impl From<f64> for CellValue {
    fn from(v: f64) -> Self {
        CellValue::Float(v)
    }
}

impl From<&str> for CellValue {
    fn from(v: &str) -> Self {
        CellValue::Text(v.to_string())
    }
}

impl From<String> for CellValue {
    fn from(v: String) -> Self {
        CellValue::Text(v)
    }
}

fn escape_csv(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = MmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(MmError::Config(format!("unknown format '{other}'; use csv or json"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub suite: String,
    /// Sorted key-value echo of the effective configuration, minus the
    /// worker count (which cannot influence any reported value).
    pub config: Vec<(String, String)>,
    pub master_seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<CellValue>>,
    pub aggregates: Vec<(String, CellValue)>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl ExperimentReport {
    pub fn new(suite: &str, config: &Config, master_seed: u64, columns: &[&str]) -> Self {
        let echo = config
            .echo()
            .into_iter()
            .filter(|(k, _)| k != "workers")
            .collect();
        Self {
            suite: suite.to_string(),
            config: echo,
            master_seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            aggregates: Vec::new(),
            wall_clock: Duration::ZERO,
        }
    }

    pub fn push_row(&mut self, row: Vec<CellValue>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(MmError::Runtime(format!(
                "suite {}: row has {} cells for {} columns",
                self.suite,
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_aggregate(&mut self, name: &str, value: CellValue) {
        self.aggregates.push((name.to_string(), value));
    }

    /// Plot-ready table: one header row, then data rows. Metadata and
    /// aggregates live in the JSON mirror.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self.columns.iter().map(|c| escape_csv(c)).collect::<Vec<_>>().join(","),
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(CellValue::csv_field).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// All fields except the wall clock, pretty-printed.
    pub fn to_json_string(&self) -> Result<String> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| MmError::Runtime(format!("report serialization failed: {e}")))?;
        Ok(format!("{body}\n"))
    }
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let content = match format {
        ReportFormat::Csv => report.to_csv_string(),
        ReportFormat::Json => report.to_json_string()?,
    };
    std::fs::write(path, content).map_err(|e| MmError::Io { path: path.to_path_buf(), source: e })
}
