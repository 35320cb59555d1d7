//! Report serialization and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::shorten::Check;

use super::config::OutputFormat;
use super::run::{Outcome, Table};

pub const SCHEMA: &str = "hofer-forge/report/v1";

/// Run metadata that varies between identical runs; everything outside
/// the header is a function of the configuration alone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    pub unix_time: u64,
    pub elapsed_seconds: f64,
    pub version: &'static str,
    /// Column meanings of the companion CSV table, if any.
    pub csv_columns: Option<Vec<String>>,
}

impl Header {
    pub fn now(elapsed_seconds: f64, table: Option<&Table>) -> Self {
        Header {
            unix_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            elapsed_seconds,
            version: env!("CARGO_PKG_VERSION"),
            csv_columns: table.map(|t| t.columns.clone()),
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    header: &'a Header,
    scenario: &'a str,
    passed: bool,
    config: &'a super::config::ScenarioConfig,
    tolerances: &'a Value,
    checks: &'a [Check],
    result: &'a Value,
    table: &'a Option<Table>,
}

pub fn to_json(outcome: &Outcome, header: &Header) -> String {
    let r = Report {
        schema: SCHEMA,
        header,
        scenario: outcome.config.kind.name(),
        passed: outcome.passed(),
        config: &outcome.config,
        tolerances: &outcome.tolerances,
        checks: &outcome.checks,
        result: &outcome.result,
        table: &outcome.table,
    };
    let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
    s.push('\n');
    s
}

/// The plot table, or the check list for scenarios without a sweep.
pub fn to_csv(outcome: &Outcome) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    match &outcome.table {
        Some(t) => {
            w.write_record(&t.columns).map_err(io)?;
            for row in &t.rows {
                w.write_record(row.iter().map(|v| format!("{v:.12e}"))).map_err(io)?;
            }
        }
        None => {
            w.write_record(["check", "passed", "detail"]).map_err(io)?;
            for c in &outcome.checks {
                w.write_record([c.name.as_str(), if c.passed { "true" } else { "false" }, c.detail.as_str()])
                    .map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes via a temporary file in the target directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let fail = |e: std::io::Error| Error::InvalidParameter(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Files written for `format`: JSON → the report at `out`; CSV → the table
/// at `out` plus the report next to it with a `.json` extension.
pub fn emit(outcome: &Outcome, header: &Header, format: OutputFormat, out: &Path) -> Result<Vec<PathBuf>> {
    match format {
        OutputFormat::Json => {
            write_atomic(out, &to_json(outcome, header))?;
            Ok(vec![out.to_path_buf()])
        }
        OutputFormat::Csv => {
            let json_path = out.with_extension("json");
            if json_path == out {
                return Err(Error::InvalidParameter("csv output path must not end in .json".into()));
            }
            write_atomic(out, &to_csv(outcome)?)?;
            write_atomic(&json_path, &to_json(outcome, header))?;
            Ok(vec![out.to_path_buf(), json_path])
        }
    }
}
