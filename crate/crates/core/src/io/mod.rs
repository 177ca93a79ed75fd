//! Matrix, factor, and report files.
//!
//! Matrices travel as MatrixMarket (array or coordinate, real general) or
//! headerless CSV; numbers are rendered with 17 significant digits so
//! write/read round-trips are bit-exact for f64. All writes go through a
//! temp-file-then-rename so readers never observe partial files.

mod factors;
mod matrix_file;
mod report;

pub use factors::{read_factors, write_factors, FactorManifest};
pub use matrix_file::{read_matrix, write_matrix, MatrixFormat};
pub use report::{read_report, write_report};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "out".to_string());
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)
}
