//! Dataset files.
//!
//! Two text formats are read:
//!
//! * dense CSV: comma-separated features with the label in the last column.
//!   A header line is allowed as the first line. Labels are `+1/-1` or
//!   `1/0` (0 maps to -1).
//! * sparse index:value: `label idx:val idx:val ...` per line with 1-based
//!   feature indices; absent features are zero.
//!
//! Blank lines and lines starting with `#` are skipped in both.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use aprid_core::problems::Dataset;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    DenseCsv,
    SparseIndexValue,
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dense_csv" | "csv" => Ok(Self::DenseCsv),
            "sparse_index_value" | "sparse" | "libsvm" => Ok(Self::SparseIndexValue),
            other => Err(format!("unknown dataset format '{other}'")),
        }
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    match format {
        DatasetFormat::DenseCsv => parse_dense_csv(&text, path),
        DatasetFormat::SparseIndexValue => parse_sparse(&text, path, None),
    }
}

fn parse_label(token: &str, path: &Path, line: usize) -> Result<i8> {
    let bad = || BenchError::Parse {
        path: path.into(),
        line,
        message: format!("unknown label '{token}' (expected +1/-1 or 1/0)"),
    };
    let v: f64 = token.trim().parse().map_err(|_| bad())?;
    if v == 1.0 {
        Ok(1)
    } else if v == -1.0 || v == 0.0 {
        Ok(-1)
    } else {
        Err(bad())
    }
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub fn parse_dense_csv(text: &str, path: &Path) -> Result<Dataset> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut first = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if is_skipped(raw) {
            continue;
        }
        let header_allowed = std::mem::replace(&mut first, false);
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(BenchError::Parse {
                path: path.into(),
                line,
                message: "a row needs at least one feature and a label".into(),
            });
        }
        let values: std::result::Result<Vec<f64>, _> = fields[..fields.len() - 1].iter().map(|f| f.parse::<f64>()).collect();
        let values = match values {
            Ok(v) => v,
            Err(_) if header_allowed => continue,
            Err(e) => {
                return Err(BenchError::Parse {
                    path: path.into(),
                    line,
                    message: format!("bad feature value: {e}"),
                })
            }
        };
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(BenchError::Parse {
                    path: path.into(),
                    line,
                    message: format!("expected {w} features, found {}", values.len()),
                })
            }
            _ => {}
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(BenchError::Parse {
                path: path.into(),
                line,
                message: format!("non-finite feature {v}"),
            });
        }
        labels.push(parse_label(fields[fields.len() - 1], path, line)?);
        features.extend(values);
    }
    let width = width.ok_or_else(|| BenchError::Parse {
        path: path.into(),
        line: 0,
        message: "no data rows".into(),
    })?;
    Ok(Dataset::new(features, width, labels)?)
}

/// Parses sparse rows; the feature count is the largest index seen unless
/// `n_features` is given.
pub fn parse_sparse(text: &str, path: &Path, n_features: Option<usize>) -> Result<Dataset> {
    let mut rows: Vec<BTreeMap<usize, f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if is_skipped(raw) {
            continue;
        }
        let err = |message: String| BenchError::Parse {
            path: path.into(),
            line,
            message,
        };
        let mut tokens = raw.split_whitespace();
        let label = parse_label(tokens.next().unwrap_or_default(), path, line)?;
        let mut row = BTreeMap::new();
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| err(format!("expected index:value, found '{tok}'")))?;
            let i: usize = i.parse().map_err(|_| err(format!("bad feature index '{i}'")))?;
            if i == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            let v: f64 = v.parse().map_err(|_| err(format!("bad feature value '{v}'")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite feature {v}")));
            }
            if row.insert(i, v).is_some() {
                return Err(err(format!("feature index {i} repeated")));
            }
            max_index = max_index.max(i);
        }
        rows.push(row);
        labels.push(label);
    }
    let d = match n_features {
        Some(d) if d < max_index => {
            return Err(BenchError::config(format!("feature index {max_index} exceeds n_features = {d}")));
        }
        Some(d) => d,
        None => max_index,
    };
    let mut features = vec![0.0; rows.len() * d];
    for (r, row) in rows.iter().enumerate() {
        for (&i, &v) in row {
            features[r * d + i - 1] = v;
        }
    }
    Ok(Dataset::new(features, d, labels)?)
}

/// Dense CSV with a header and `+1/-1` labels. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_dense_csv(data: &Dataset) -> String {
    let d = data.n_features();
    let mut out = String::new();
    for j in 0..d {
        let _ = write!(out, "x{},", j + 1);
    }
    out.push_str("label\n");
    for i in 0..data.n_samples() {
        for v in data.row(i) {
            let _ = write!(out, "{v:?},");
        }
        let _ = writeln!(out, "{}", data.label(i));
    }
    out
}
