use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("a count series needs at least 2 observations, got {0}")]
    TooShort(usize),
}

/// An ordered sequence of non-negative counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountSeries {
    values: Vec<u64>,
    pub name: String,
    pub source_path: String,
}

impl CountSeries {
    pub fn new(
        values: Vec<u64>,
        name: impl Into<String>,
        source_path: impl Into<String>,
    ) -> Result<Self, SeriesError> {
        if values.len() < 2 {
            return Err(SeriesError::TooShort(values.len()));
        }
        Ok(CountSeries {
            values,
            name: name.into(),
            source_path: source_path.into(),
        })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum::<f64>() / self.values.len() as f64
    }

    /// Sample variance with denominator `n - 1`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|&v| (v as f64 - m).powi(2)).sum();
        ss / (self.values.len() - 1) as f64
    }
}

impl Deref for CountSeries {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.values
    }
}
