use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// On-disk matrix encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    /// MatrixMarket `array` (dense, column-major) on write; `array` and
    /// `coordinate` accepted on read.
    MatrixMarket,
    /// Headerless comma-separated rows of reals.
    Csv,
}

/// Read a matrix file; the format is auto-detected from the
/// `%%MatrixMarket` sentinel with an `.mtx` extension fallback, anything
/// else parses as CSV.
pub fn read_matrix<P: AsRef<Path>>(path: P) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path.display().to_string();
    let is_mm = text.starts_with("%%MatrixMarket")
        || path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx"));
    if is_mm {
        parse_matrix_market(&name, &text)
    } else {
        parse_csv(&name, &text)
    }
}

fn parse_value(name: &str, line_no: usize, token: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::ParseError {
        path: name.into(),
        line: line_no,
        msg: format!("not a real number: {token:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteEntry {
            context: format!("{name}:{line_no}: value {token:?}"),
        });
    }
    Ok(v)
}

fn parse_dim(name: &str, line_no: usize, token: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::ParseError {
        path: name.into(),
        line: line_no,
        msg: format!("not a dimension: {token:?}"),
    })
}

fn parse_matrix_market(name: &str, text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (line_no, header) = lines.next().ok_or_else(|| Error::ParseError {
        path: name.into(),
        line: 1,
        msg: "empty file".into(),
    })?;
    let fields: Vec<String> =
        header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::ParseError {
            path: name.into(),
            line: line_no,
            msg: "expected '%%MatrixMarket matrix <format> <field> <symmetry>'".into(),
        });
    }
    let format = fields[2].as_str();
    if fields[3] != "real" {
        return Err(Error::ParseError {
            path: name.into(),
            line: line_no,
            msg: format!("unsupported field {:?} (only 'real')", fields[3]),
        });
    }
    if fields[4] != "general" {
        return Err(Error::ParseError {
            path: name.into(),
            line: line_no,
            msg: format!("unsupported symmetry {:?} (only 'general')", fields[4]),
        });
    }

    let mut data_lines = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line_no, size_line) = data_lines.next().ok_or_else(|| Error::ParseError {
        path: name.into(),
        line: line_no,
        msg: "missing size line".into(),
    })?;
    let size_tokens: Vec<&str> = size_line.split_whitespace().collect();

    match format {
        "array" => {
            if size_tokens.len() != 2 {
                return Err(Error::ParseError {
                    path: name.into(),
                    line: size_line_no,
                    msg: "array size line must be 'rows cols'".into(),
                });
            }
            let rows = parse_dim(name, size_line_no, size_tokens[0])?;
            let cols = parse_dim(name, size_line_no, size_tokens[1])?;
            let mut m = DenseMatrix::zeros(rows.max(1), cols.max(1));
            if rows == 0 || cols == 0 {
                return Err(Error::DimensionMismatch {
                    path: name.into(),
                    msg: "zero-sized matrix".into(),
                });
            }
            let mut count = 0usize;
            for (ln, line) in data_lines {
                for token in line.split_whitespace() {
                    if count >= rows * cols {
                        return Err(Error::DimensionMismatch {
                            path: name.into(),
                            msg: format!("more than {} entries", rows * cols),
                        });
                    }
                    let v = parse_value(name, ln, token)?;
                    // array format lists entries column by column
                    m.set(count % rows, count / rows, v);
                    count += 1;
                }
            }
            if count != rows * cols {
                return Err(Error::DimensionMismatch {
                    path: name.into(),
                    msg: format!("expected {} entries, found {count}", rows * cols),
                });
            }
            Ok(m)
        }
        "coordinate" => {
            if size_tokens.len() != 3 {
                return Err(Error::ParseError {
                    path: name.into(),
                    line: size_line_no,
                    msg: "coordinate size line must be 'rows cols nnz'".into(),
                });
            }
            let rows = parse_dim(name, size_line_no, size_tokens[0])?;
            let cols = parse_dim(name, size_line_no, size_tokens[1])?;
            let nnz = parse_dim(name, size_line_no, size_tokens[2])?;
            if rows == 0 || cols == 0 {
                return Err(Error::DimensionMismatch {
                    path: name.into(),
                    msg: "zero-sized matrix".into(),
                });
            }
            let mut m = DenseMatrix::zeros(rows, cols);
            let mut count = 0usize;
            for (ln, line) in data_lines {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(Error::ParseError {
                        path: name.into(),
                        line: ln,
                        msg: "coordinate entry must be 'i j value'".into(),
                    });
                }
                let i = parse_dim(name, ln, toks[0])?;
                let j = parse_dim(name, ln, toks[1])?;
                if i < 1 || i > rows || j < 1 || j > cols {
                    return Err(Error::DimensionMismatch {
                        path: name.into(),
                        msg: format!("entry ({i}, {j}) outside {rows}x{cols}"),
                    });
                }
                let v = parse_value(name, ln, toks[2])?;
                // duplicates accumulate, as is conventional when densifying
                m.set(i - 1, j - 1, m.get(i - 1, j - 1) + v);
                count += 1;
            }
            if count != nnz {
                return Err(Error::DimensionMismatch {
                    path: name.into(),
                    msg: format!("expected {nnz} entries, found {count}"),
                });
            }
            Ok(m)
        }
        other => Err(Error::ParseError {
            path: name.into(),
            line: line_no,
            msg: format!("unsupported format {other:?}"),
        }),
    }
}

fn parse_csv(name: &str, text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for token in line.split(',') {
            row.push(parse_value(name, line_no, token.trim())?);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::DimensionMismatch {
                    path: name.into(),
                    msg: format!(
                        "row {line_no} has {} entries, expected {}",
                        row.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::ParseError {
            path: name.into(),
            line: 1,
            msg: "no data rows".into(),
        });
    }
    let r = rows.len();
    let c = rows[0].len();
    DenseMatrix::from_vec(r, c, rows.into_iter().flatten().collect())
}

/// 17-significant-digit decimal rendering: round-trip exact for binary64.
fn render(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a matrix in the requested format (atomically).
pub fn write_matrix<P: AsRef<Path>>(path: P, a: &DenseMatrix, format: MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    match format {
        MatrixFormat::MatrixMarket => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            out.push_str(&format!("{} {}\n", a.rows(), a.cols()));
            for j in 0..a.cols() {
                for i in 0..a.rows() {
                    out.push_str(&render(a.get(i, j)));
                    out.push('\n');
                }
            }
        }
        MatrixFormat::Csv => {
            for i in 0..a.rows() {
                let row: Vec<String> = a.row(i).iter().map(|&v| render(v)).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
    }
    super::atomic_write(path, &out)
}
