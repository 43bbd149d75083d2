use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const TOOL: &str = "cmpgarma";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub seed_generated: bool,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(seed: Option<u64>, seed_generated: bool, config_sha256: String) -> Self {
        Provenance {
            tool: TOOL,
            version: VERSION,
            seed,
            seed_generated,
            config_sha256,
        }
    }

    /// The first line of every CSV the tool writes.
    pub fn comment(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# {} {} seed={} config_sha256={}\n",
            self.tool, self.version, seed, self.config_sha256
        )
    }
}

/// 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated table with the provenance comment on top.
pub struct Table {
    buf: String,
}

impl Table {
    pub fn new(provenance: &Provenance, header: &[&str]) -> Self {
        let mut buf = provenance.comment();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Table { buf }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            let _ = write!(self.buf, "{}", f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

pub fn write_file(path: impl Into<PathBuf>, contents: &str) -> Result<PathBuf, CliError> {
    let path = path.into();
    std::fs::write(&path, contents).map_err(|e| CliError::output(&path, e))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: impl Into<PathBuf>, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    write_file(path, &text)
}
