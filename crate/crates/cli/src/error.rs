use std::path::PathBuf;

use compois_garma::garma::ModelError;
use compois_garma::mcmc::McmcError;
use compois_garma::prediction::PredictionError;
use thiserror::Error;

use crate::data::DataError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 usage or config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Output { .. } => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Standard output closed early, e.g. piped into `head`.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Output { source, .. } if source.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub(crate) fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.into(),
            source,
        }
    }
}

/// Maps model errors: shape problems are data errors, failures inside the
/// normalizing constant or the sampler are numerical.
impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Truncation(_) | ModelError::Sampler(_) => CliError::Numerical(e.to_string()),
            ModelError::SeriesTooShort { .. } => CliError::Data(DataError::Model(e.to_string())),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<McmcError> for CliError {
    fn from(e: McmcError) -> Self {
        match e {
            McmcError::Config(c) => CliError::Usage(c.to_string()),
            McmcError::Model(m) => m.into(),
            McmcError::Step { iteration, source } => match CliError::from(source) {
                CliError::Numerical(msg) => CliError::Numerical(format!("iteration {iteration}: {msg}")),
                other => other,
            },
        }
    }
}

impl From<PredictionError> for CliError {
    fn from(e: PredictionError) -> Self {
        match e {
            PredictionError::Model(m) => m.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}
