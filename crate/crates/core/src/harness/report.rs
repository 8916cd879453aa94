//! Run reports and their JSON/CSV serialization.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scenario::CheckId;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// `code` is machine readable (`alpha_out_of_range`, `symbol_kind`, ..).
    Skipped { code: String, reason: String },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped { .. } => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub scenario: String,
    pub check: CheckId,
    pub alpha: Option<f64>,
    pub symbol: Option<String>,
    #[serde(flatten)]
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub threads: usize,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: rayon::current_num_threads(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub scenarios: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub environment: Environment,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub elapsed_seconds: f64,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
}

impl RunReport {
    pub fn empty() -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            scenarios: Vec::new(),
            config: BTreeMap::new(),
            environment: Environment::current(),
            started_unix: 0,
            finished_unix: 0,
            elapsed_seconds: 0.0,
            summary: Summary::default(),
            checks: Vec::new(),
        }
    }

    pub fn failed(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn recount(&mut self) {
        let mut s = Summary::default();
        for c in &self.checks {
            match c.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Skipped { .. } => s.skipped += 1,
            }
        }
        self.summary = s;
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(text)?;
        if report.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported report schema {} (expected {SCHEMA_VERSION})",
                report.schema
            )));
        }
        Ok(report)
    }

    /// One row per record; metric columns are the union of all metric names.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let names: BTreeSet<&str> = self
            .checks
            .iter()
            .flat_map(|c| c.metrics.keys().map(String::as_str))
            .collect();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["scenario", "check", "alpha", "symbol", "status", "skip_code", "skip_reason"];
        header.extend(names.iter().copied());
        w.write_record(&header)?;
        for c in &self.checks {
            let (code, reason) = match &c.status {
                Status::Skipped { code, reason } => (code.clone(), reason.clone()),
                _ => (String::new(), String::new()),
            };
            let mut row = vec![
                c.scenario.clone(),
                c.check.to_string(),
                c.alpha.map(|a| a.to_string()).unwrap_or_default(),
                c.symbol.clone().unwrap_or_default(),
                c.status.label().to_string(),
                code,
                reason,
            ];
            row.extend(names.iter().map(|n| c.metrics.get(*n).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("flush", "<report csv>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Parse(format!("unknown report format '{s}' (json or csv)"))),
        }
    }
}

pub fn emit_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io("create", path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        ReportFormat::Json => {
            use std::io::Write;
            let text = report.to_json()?;
            out.write_all(text.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("write", path, e))?;
        }
        ReportFormat::Csv => report.write_csv(&mut out)?,
    }
    Ok(())
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io("read", path, e))?;
    RunReport::from_json(&text)
}
