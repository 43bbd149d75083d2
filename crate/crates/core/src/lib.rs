//! Bayesian estimation and prediction for count time series under a
//! Conway-Maxwell-Poisson GARMA model.
//!
//! * [`compois`]: pmf, truncated normalizing constant, moment approximations.
//! * [`sampler`]: exact rejection sampling with Poisson and geometric envelopes.
//! * [`garma`]: link recursions for `mu_t`, `nu_t` and the partial likelihood.
//! * [`mcmc`]: exchange-algorithm and direct Metropolis-Hastings chains.
//! * [`prediction`]: one-step-ahead predictive pmf and fitted `mu_t` paths.
//! * [`diagnostics`]: autocorrelation, effective sample size, chain summaries.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, with `F32` variants for single precision.

pub mod compois;
pub mod diagnostics;
pub mod garma;
pub mod mcmc;
pub mod prediction;
pub mod real;
pub mod sampler;
pub mod series;

pub use real::Real;
pub use series::CountSeries;

pub use prediction::PredictivePmf;

pub type ComPoissonParams = compois::ComPoissonParams<f64>;
pub type TruncationPolicy = compois::TruncationPolicy<f64>;
pub type Envelope = sampler::Envelope<f64>;
pub type ModelOrder = garma::ModelOrder<f64>;
pub type GarmaCoefficients = garma::GarmaCoefficients<f64>;
pub type LinkState = garma::LinkState<f64>;
pub type PriorSpec = mcmc::PriorSpec<f64>;
pub type McmcConfig = mcmc::McmcConfig<f64>;
pub type PosteriorSample = mcmc::PosteriorSample<f64>;
pub type ChainResult = mcmc::ChainResult<f64>;
pub type Kernel = mcmc::Kernel<f64>;
pub type ChainSummary = diagnostics::ChainSummary<f64>;
pub type MuPathPoint = prediction::MuPathPoint<f64>;

pub type ComPoissonParamsF32 = compois::ComPoissonParams<f32>;
pub type TruncationPolicyF32 = compois::TruncationPolicy<f32>;
pub type ModelOrderF32 = garma::ModelOrder<f32>;
pub type GarmaCoefficientsF32 = garma::GarmaCoefficients<f32>;
pub type PriorSpecF32 = mcmc::PriorSpec<f32>;
pub type McmcConfigF32 = mcmc::McmcConfig<f32>;
pub type ChainResultF32 = mcmc::ChainResult<f32>;

/// Seedable random stream used throughout (ChaCha20).
pub type Stream = rand_chacha::ChaCha20Rng;
