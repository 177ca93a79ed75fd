use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ddecomp::FactorTriple;
use crate::error::{Error, Result};

use super::matrix_file::{read_matrix, write_matrix, MatrixFormat};

/// Sidecar describing a factor-file set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorManifest {
    pub k: usize,
    pub gauge_normalized: bool,
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "factors".to_string());
    name.push_str(suffix);
    prefix.with_file_name(name)
}

/// Write `P`, `D`, `Q` as `<prefix>.P`, `<prefix>.D`, `<prefix>.Q`
/// (MatrixMarket array) plus a `<prefix>.json` manifest.
pub fn write_factors<P: AsRef<Path>>(
    prefix: P,
    triple: &FactorTriple,
    gauge_normalized: bool,
) -> Result<()> {
    let prefix = prefix.as_ref();
    write_matrix(suffixed(prefix, ".P"), &triple.p, MatrixFormat::MatrixMarket)?;
    write_matrix(suffixed(prefix, ".D"), &triple.d, MatrixFormat::MatrixMarket)?;
    write_matrix(suffixed(prefix, ".Q"), &triple.q, MatrixFormat::MatrixMarket)?;
    let manifest = FactorManifest { k: triple.k, gauge_normalized };
    let path = suffixed(prefix, ".json");
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    })?;
    text.push('\n');
    super::atomic_write(&path, &text)
}

/// Read a factor-file set written by [`write_factors`].
pub fn read_factors<P: AsRef<Path>>(prefix: P) -> Result<(FactorTriple, FactorManifest)> {
    let prefix = prefix.as_ref();
    let manifest_path = suffixed(prefix, ".json");
    let text = std::fs::read_to_string(&manifest_path).map_err(|source| Error::Io {
        path: manifest_path.display().to_string(),
        source,
    })?;
    let manifest: FactorManifest =
        serde_json::from_str(&text).map_err(|e| Error::ParseError {
            path: manifest_path.display().to_string(),
            line: e.line(),
            msg: e.to_string(),
        })?;
    let p = read_matrix(suffixed(prefix, ".P"))?;
    let d = read_matrix(suffixed(prefix, ".D"))?;
    let q = read_matrix(suffixed(prefix, ".Q"))?;
    let triple = FactorTriple::new(p, d, q)?;
    if triple.k != manifest.k {
        return Err(Error::DimensionMismatch {
            path: manifest_path.display().to_string(),
            msg: format!("manifest k = {}, factor k = {}", manifest.k, triple.k),
        });
    }
    Ok((triple, manifest))
}
