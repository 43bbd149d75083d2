//! JSON run configuration. Every field is optional; unknown fields are
//! rejected and type errors name the offending field path.

use std::path::{Path, PathBuf};

use compois_garma::mcmc::ConfigError;
use compois_garma::{Kernel, McmcConfig, ModelOrder, PriorSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub p: usize,
    pub q: usize,
    pub c: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { p: 1, q: 1, c: 0.1 }
    }
}

impl ModelSection {
    pub fn order(&self) -> ModelOrder {
        ModelOrder {
            p: self.p,
            q: self.q,
            c: self.c,
        }
    }
}

/// Chain schedule. Mirrors the library's `McmcConfig` except that the seed
/// may be left out, in which case one is generated and recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcSection {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub target_accept: f64,
    pub seed: Option<u64>,
    pub initial_step_sizes: Vec<f64>,
    pub adapt_interval: usize,
    pub adapt_scales: bool,
}

impl Default for McmcSection {
    fn default() -> Self {
        let d = McmcConfig::default();
        McmcSection {
            iterations: d.iterations,
            burn_in: d.burn_in,
            thin: d.thin,
            target_accept: d.target_accept,
            seed: None,
            initial_step_sizes: d.initial_step_sizes,
            adapt_interval: d.adapt_interval,
            adapt_scales: d.adapt_scales,
        }
    }
}

impl McmcSection {
    pub fn with_seed(&self, seed: u64) -> McmcConfig {
        McmcConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            target_accept: self.target_accept,
            seed,
            initial_step_sizes: self.initial_step_sizes.clone(),
            adapt_interval: self.adapt_interval,
            adapt_scales: self.adapt_scales,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictionSection {
    pub draws_per_sample: usize,
}

impl Default for PredictionSection {
    fn default() -> Self {
        PredictionSection {
            draws_per_sample: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub max_lag: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            max_lag: compois_garma::diagnostics::DEFAULT_MAX_LAG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub prior: PriorSpec,
    pub mcmc: McmcSection,
    pub kernel: Kernel,
    pub prediction: PredictionSection,
    pub diagnostics: DiagnosticsSection,
    /// Independent chains; chain `k` (0-based) is seeded with `seed + k`.
    pub chains: usize,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSection::default(),
            prior: PriorSpec::default(),
            mcmc: McmcSection::default(),
            kernel: Kernel::default(),
            prediction: PredictionSection::default(),
            diagnostics: DiagnosticsSection::default(),
            chains: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn config_error(path: &str, message: impl ToString) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.to_string(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(if path == "." { "(root)" } else { &path }, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("reading config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every section; errors carry the section path.
    pub fn validate(&self) -> Result<(), CliError> {
        let order = self.model.order();
        order.validate().map_err(|e| config_error("model", e))?;
        self.prior.validate().map_err(|e| match e {
            ConfigError::Prior(field) => config_error(&format!("prior.{field}"), e),
            other => config_error("prior", other),
        })?;
        self.mcmc
            .with_seed(0)
            .validate(order.dimension())
            .map_err(|e| {
                let field = match e {
                    ConfigError::Iterations => "mcmc.iterations",
                    ConfigError::BurnIn { .. } => "mcmc.burn_in",
                    ConfigError::Thin => "mcmc.thin",
                    ConfigError::AdaptInterval => "mcmc.adapt_interval",
                    ConfigError::TargetAccept => "mcmc.target_accept",
                    ConfigError::StepSizeCount { .. } | ConfigError::StepSizeValue => {
                        "mcmc.initial_step_sizes"
                    }
                    ConfigError::Prior(_) => "prior",
                };
                config_error(field, e)
            })?;
        if let Kernel::Direct { policy } = &self.kernel {
            policy.validate().map_err(|e| config_error("kernel.policy", e))?;
        }
        if self.chains == 0 {
            return Err(config_error("chains", "must be >= 1"));
        }
        if self.prediction.draws_per_sample == 0 {
            return Err(config_error("prediction.draws_per_sample", "must be >= 1"));
        }
        Ok(())
    }

    /// SHA-256 of the serialized configuration; `output_dir` is not part of it.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
