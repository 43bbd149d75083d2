//! Count-series CSV ingestion.
//!
//! One non-negative integer per line. Lines starting with `#` and blank lines
//! are ignored; the first remaining line is treated as a header when it is
//! not numeric.

use std::path::Path;

use compois_garma::CountSeries;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: no data values")]
    Empty { path: String },
    #[error("{path}:{line}: {reason} ({text:?})")]
    Parse {
        path: String,
        line: usize,
        text: String,
        reason: &'static str,
    },
    #[error("{path}: {len} value(s), at least 2 are required")]
    TooShort { path: String, len: usize },
    #[error("{0}")]
    Model(String),
}

impl DataError {
    pub fn line(&self) -> Option<usize> {
        match self {
            DataError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// What `load_csv` reports about a series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesStats {
    pub path: String,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

impl SeriesStats {
    pub fn of(series: &CountSeries) -> Self {
        SeriesStats {
            path: series.source_path.clone(),
            n: series.len(),
            mean: series.mean(),
            variance: series.variance(),
        }
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn is_numeric(s: &str) -> bool {
    s.parse::<f64>().is_ok()
}

pub fn parse_counts(text: &str, path: &str) -> Result<Vec<u64>, DataError> {
    let mut values = Vec::new();
    for (k, (line, field)) in records(text).enumerate() {
        if k == 0 && !is_numeric(field) {
            continue;
        }
        let value = field.parse::<u64>().map_err(|_| DataError::Parse {
            path: path.to_string(),
            line,
            text: field.to_string(),
            reason: if field.starts_with('-') && is_numeric(field) {
                "negative count"
            } else {
                "not a non-negative integer"
            },
        })?;
        values.push(value);
    }
    Ok(values)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<CountSeries, DataError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: shown.clone(),
        source,
    })?;
    let values = parse_counts(&text, &shown)?;
    if values.is_empty() {
        return Err(DataError::Empty { path: shown });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let len = values.len();
    CountSeries::new(values, name, shown.clone()).map_err(|_| DataError::TooShort { path: shown, len })
}

/// Header line `count` followed by one value per line.
pub fn series_body(values: &[u64]) -> String {
    let mut out = String::with_capacity(6 + 4 * values.len());
    out.push_str("count\n");
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}
