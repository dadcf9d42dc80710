//! Report files: a JSON array of records and a flat CSV table.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::verify::Report;

pub const CSV_COLUMNS: [&str; 6] = ["name", "signal", "lhs", "rhs", "slack", "pass"];

pub fn reports_json(reports: &[Report]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(reports).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn reports_csv(reports: &[Report]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in reports {
        let (lhs, rhs, slack) = r.row();
        w.write_record([
            r.name().to_string(),
            r.signal().to_string(),
            lhs.to_string(),
            rhs.to_string(),
            slack.to_string(),
            r.pass().to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`; returns both paths.
pub fn emit_report(dir: &Path, stem: &str, reports: &[Report]) -> Result<(PathBuf, PathBuf)> {
    if reports.is_empty() {
        return Err(Error::Precondition("no reports to write".into()));
    }
    fs::create_dir_all(dir)?;
    let json = dir.join(format!("{stem}.json"));
    let table = dir.join(format!("{stem}.csv"));
    fs::write(&json, reports_json(reports)?)?;
    fs::write(&table, reports_csv(reports)?)?;
    Ok((json, table))
}

/// File-name-safe version of a signal label.
pub fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}
