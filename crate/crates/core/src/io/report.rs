use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::ExperimentReport;

/// Serialize a report as pretty JSON with stable field ordering.
///
/// Struct fields serialize in declaration order and floats use the
/// shortest round-trip rendering, so parsing a report and writing it back
/// reproduces the bytes exactly.
pub fn write_report<P: AsRef<Path>>(path: P, report: &ExperimentReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Io {
        path: path.as_ref().display().to_string(),
        source: std::io::Error::other(e),
    })?;
    text.push('\n');
    super::atomic_write(path.as_ref(), &text)
}

pub fn read_report<P: AsRef<Path>>(path: P) -> Result<ExperimentReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::ParseError {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })
}
