use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

use super::PairDataset;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Ignore the first non-empty line.
    pub skip_header: bool,
    /// Accept files with more than two columns and keep the first two.
    /// Only meaningful when metadata says both variables are scalar.
    pub allow_extra_columns: bool,
}

/// Parses whitespace-separated numeric rows. Blank lines are skipped;
/// every remaining row must have the same number of columns (at least 2).
/// Returns the columns.
pub fn parse_columns(text: &str, path: &Path, skip_header: bool) -> Result<Vec<Vec<f64>>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut header_pending = skip_header;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let mut row = Vec::new();
        for token in line.split_whitespace() {
            let value: f64 = token
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric token {token:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value {token:?}")));
            }
            row.push(value);
        }
        if columns.is_empty() {
            if row.len() < 2 {
                return Err(parse_err(line_no, format!("expected at least 2 columns, found {}", row.len())));
            }
            columns = vec![Vec::new(); row.len()];
        } else if row.len() != columns.len() {
            return Err(parse_err(
                line_no,
                format!("expected {} columns, found {}", columns.len(), row.len()),
            ));
        }
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    if columns.first().map_or(0, Vec::len) < 2 {
        return Err(parse_err(0, "need at least 2 observations".into()));
    }
    Ok(columns)
}

/// Loads a two-column pair file; the id is the file stem.
pub fn load_pair_file(path: impl AsRef<Path>, options: &LoadOptions) -> Result<PairDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut columns = parse_columns(&text, path, options.skip_header)?;
    if columns.len() > 2 && !options.allow_extra_columns {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("{} columns: multidimensional pairs are not supported", columns.len()),
        });
    }
    columns.truncate(2);
    let y = columns.pop().unwrap_or_default();
    let x = columns.pop().unwrap_or_default();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    PairDataset::new(id, x, y)
}

/// Writes `x y` rows with 17 significant digits, enough to round-trip
/// every `f64` exactly.
pub fn write_pair_file(path: impl AsRef<Path>, pair: &PairDataset) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(pair.len() * 48);
    for (x, y) in pair.x.iter().zip(&pair.y) {
        let _ = writeln!(out, "{x:.16e} {y:.16e}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
