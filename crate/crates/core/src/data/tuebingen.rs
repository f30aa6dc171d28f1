use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

use super::pairfile::parse_columns;
use super::{Direction, PairDataset};

/// One row of a `pairmeta.txt` file. Column ranges are 1-based and
/// inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaEntry {
    pub id: String,
    pub cause: (usize, usize),
    pub effect: (usize, usize),
    pub weight: f64,
}

impl MetaEntry {
    /// Cause and effect each occupy exactly one column.
    pub fn is_univariate(&self) -> bool {
        self.cause.0 == self.cause.1 && self.effect.0 == self.effect.1
    }

    pub fn data_file_name(&self) -> String {
        format!("pair{}.txt", self.id)
    }
}

fn normalize_id(raw: &str) -> String {
    match raw.parse::<u32>() {
        Ok(n) => format!("{n:04}"),
        Err(_) => raw.to_string(),
    }
}

/// Parses `id cause-start cause-end effect-start effect-end weight` rows.
pub fn parse_meta(text: &str, path: &Path) -> Result<Vec<MetaEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let col = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|c| *c >= 1)
                .ok_or_else(|| err(format!("invalid column index {s:?}")))
        };
        let weight: f64 = fields[5]
            .parse()
            .map_err(|_| err(format!("invalid weight {:?}", fields[5])))?;
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(err(format!("invalid weight {weight}")));
        }
        let entry = MetaEntry {
            id: normalize_id(fields[0]),
            cause: (col(fields[1])?, col(fields[2])?),
            effect: (col(fields[3])?, col(fields[4])?),
            weight,
        };
        if entry.cause.0 > entry.cause.1 || entry.effect.0 > entry.effect.1 {
            return Err(err("column range with start after end".into()));
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Loads the scalar pairs listed in `meta_path` from `dir`.
///
/// Pairs whose cause or effect spans several columns are skipped, as are
/// pairs with zero weight. The lower-numbered of the two columns becomes
/// `x`, and the label records which of the two is the cause.
pub fn load_pair_directory(dir: &Path, meta_path: &Path, skip_header: bool) -> Result<Vec<PairDataset>> {
    let meta_text = fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?;
    let entries = parse_meta(&meta_text, meta_path)?;
    let mut pairs = Vec::new();
    for entry in entries.iter().filter(|e| e.is_univariate() && e.weight > 0.0) {
        let cause = entry.cause.0;
        let effect = entry.effect.0;
        let path = dir.join(entry.data_file_name());
        if cause == effect {
            return Err(Error::Parse {
                path: meta_path.to_path_buf(),
                line: 0,
                message: format!("pair {}: cause and effect share column {cause}", entry.id),
            });
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let columns = parse_columns(&text, &path, skip_header)?;
        if cause.max(effect) > columns.len() {
            return Err(Error::Parse {
                path,
                line: 0,
                message: format!(
                    "pair {}: meta references column {} but the file has {}",
                    entry.id,
                    cause.max(effect),
                    columns.len()
                ),
            });
        }
        let (first, second, label) = if cause < effect {
            (cause, effect, Direction::XCausesY)
        } else {
            (effect, cause, Direction::YCausesX)
        };
        let pair = PairDataset::new(
            entry.id.clone(),
            columns[first - 1].clone(),
            columns[second - 1].clone(),
        )?
        .with_weight(entry.weight)?
        .with_label(label);
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Loads a cause-effect-pairs directory with `pairmeta.txt` and
/// `pairNNNN.txt` files.
pub fn load_tuebingen(dir: impl AsRef<Path>) -> Result<Vec<PairDataset>> {
    let dir = dir.as_ref();
    load_pair_directory(dir, &dir.join("pairmeta.txt"), false)
}

/// Writes a meta file describing two-column pairs.
pub fn write_meta(path: impl AsRef<Path>, pairs: &[PairDataset]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in pairs {
        let (c, e) = match p.label {
            Some(Direction::YCausesX) => (2, 1),
            _ => (1, 2),
        };
        let _ = writeln!(out, "{} {c} {c} {e} {e} {}", p.id, p.weight);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes `id,direction` rows with a header.
pub fn write_labels_csv(path: impl AsRef<Path>, pairs: &[PairDataset]) -> Result<()> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let mut out = String::from("id,direction\n");
    for p in pairs {
        let label = p.label.map_or("unknown", Direction::as_str);
        let _ = writeln!(out, "{},{label}", p.id);
    }
    fs::write(&path, out).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(meta: &str, files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("pairmeta.txt"), meta).unwrap();
        for (name, body) in files {
            fs::write(dir.path().join(name), body).unwrap();
        }
        dir
    }

    #[test]
    fn scalar_pair_is_retained() {
        let dir = fixture("0001 1 1 2 2 1.0\n", &[("pair0001.txt", "1 2\n3 4\n5 7\n")]);
        let pairs = load_tuebingen(dir.path()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].label, Some(Direction::XCausesY));
        assert_eq!(pairs[0].weight, 1.0);
        assert_eq!(pairs[0].x, vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn reversed_and_multivariate_rows() {
        let dir = fixture(
            "1   2 2 1 1   0.5\n0002 1 3 4 4 1\n0003 1 1 2 2 0\n",
            &[("pair0001.txt", "1 2\n3 4\n")],
        );
        let pairs = load_tuebingen(dir.path()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].id, "0001");
        assert_eq!(pairs[0].label, Some(Direction::YCausesX));
        assert_eq!(pairs[0].weight, 0.5);
    }

    #[test]
    fn extra_columns_are_ignored_for_scalar_pairs() {
        let dir = fixture("0004 3 3 1 1 1\n", &[("pair0004.txt", "1 2 3 4\n5 6 7 8\n")]);
        let pairs = load_tuebingen(dir.path()).unwrap();
        assert_eq!(pairs[0].x, vec![1.0, 5.0]);
        assert_eq!(pairs[0].y, vec![3.0, 7.0]);
        assert_eq!(pairs[0].label, Some(Direction::YCausesX));
    }

    #[test]
    fn column_mismatch_names_pair() {
        let dir = fixture("0007 1 1 3 3 1\n", &[("pair0007.txt", "1 2\n3 4\n")]);
        let err = load_tuebingen(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("0007"), "{err}");
    }

    #[test]
    fn missing_meta_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(load_tuebingen(dir.path()).unwrap_err().kind(), "io");
    }

    #[test]
    fn bad_meta_rows() {
        for bad in ["0001 1 1 2\n", "0001 0 1 2 2 1\n", "0001 1 1 2 2 w\n", "0001 2 1 3 3 1\n"] {
            assert!(parse_meta(bad, Path::new("m")).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn meta_writer_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let a = PairDataset::new("0001", vec![1.0, 2.0], vec![3.0, 4.0]).unwrap().with_label(Direction::XCausesY);
        let b = PairDataset::new("0002", vec![1.0, 2.0], vec![3.0, 5.0])
            .unwrap()
            .with_label(Direction::YCausesX)
            .with_weight(0.25)
            .unwrap();
        let path = dir.path().join("pairmeta.txt");
        write_meta(&path, &[a, b]).unwrap();
        let entries = parse_meta(&fs::read_to_string(&path).unwrap(), &path).unwrap();
        assert_eq!(entries[1].cause, (2, 2));
        assert_eq!(entries[1].weight, 0.25);
    }
}
