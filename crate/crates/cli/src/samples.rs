//! `samples.csv`: an `iteration` column followed by one column per coefficient.

use std::path::Path;

use compois_garma::{GarmaCoefficients, ModelOrder, PosteriorSample, PriorSpec};

use crate::data::DataError;
use crate::error::CliError;
use crate::output::{real, Provenance, Table};

pub fn render(provenance: &Provenance, names: &[String], samples: &[PosteriorSample]) -> String {
    let mut header = vec!["iteration"];
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new(provenance, &header);
    for s in samples {
        t.row(std::iter::once(s.iteration.to_string()).chain(s.coeffs.to_flat().into_iter().map(real)));
    }
    t.into_string()
}

/// Parsed draws: coefficient names, iteration numbers and flat coefficient rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub names: Vec<String>,
    pub iterations: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl Draws {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    /// Draws as posterior samples of `order`, with prior and likelihood
    /// evaluated against `y`.
    pub fn to_samples(
        &self,
        path: &str,
        y: &[u64],
        order: &ModelOrder,
        prior: &PriorSpec,
    ) -> Result<Vec<PosteriorSample>, CliError> {
        let expected = order.coefficient_names();
        if expected != self.names {
            return Err(DataError::Model(format!(
                "{path}: columns {:?} do not match the model's coefficients {:?}",
                self.names, expected
            ))
            .into());
        }
        self.rows
            .iter()
            .zip(&self.iterations)
            .map(|(row, &it)| {
                let c = GarmaCoefficients::from_flat(order, row)?;
                Ok(PosteriorSample::at(c, it, y, order, prior)?)
            })
            .collect()
    }
}

fn parse_error(path: &str, line: usize, text: &str, reason: &'static str) -> DataError {
    DataError::Parse {
        path: path.to_string(),
        line,
        text: text.to_string(),
        reason,
    }
}

pub fn parse(text: &str, path: &str) -> Result<Draws, DataError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| DataError::Empty {
        path: path.to_string(),
    })?;
    let mut cols = header.split(',').map(str::trim);
    if cols.next() != Some("iteration") {
        return Err(parse_error(path, hline, header, "header must start with `iteration`"));
    }
    let names: Vec<String> = cols.map(str::to_string).collect();
    if names.is_empty() {
        return Err(parse_error(path, hline, header, "no coefficient columns"));
    }
    let mut draws = Draws {
        names,
        iterations: Vec::new(),
        rows: Vec::new(),
    };
    for (line, record) in lines {
        let mut fields = record.split(',').map(str::trim);
        let it = fields
            .next()
            .and_then(|f| f.parse::<usize>().ok())
            .ok_or_else(|| parse_error(path, line, record, "bad iteration number"))?;
        let row = fields
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| parse_error(path, line, record, "bad coefficient value"))?;
        if row.len() != draws.names.len() {
            return Err(parse_error(path, line, record, "wrong number of columns"));
        }
        draws.iterations.push(it);
        draws.rows.push(row);
    }
    if draws.rows.is_empty() {
        return Err(DataError::Empty {
            path: path.to_string(),
        });
    }
    Ok(draws)
}

pub fn load(path: &Path) -> Result<Draws, DataError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: shown.clone(),
        source,
    })?;
    parse(&text, &shown)
}
