//! The COM-Poisson distribution in the mean-like `(mu, nu)` parameterization
//!
//! `p(y | mu, nu) = (mu^y / y!)^nu / Z(mu, nu)`, `y = 0, 1, 2, ...`
//!
//! `Z` has no closed form outside `nu = 1`. The truncated-sum evaluation here
//! serves as the reference for tests and for the direct Metropolis-Hastings
//! comparator; the exchange sampler never calls it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{LogSumExp, Real};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamError {
    #[error("mu must be finite and > 0 (got {0})")]
    Mu(f64),
    #[error("nu must be finite and > 0 (got {0})")]
    Nu(f64),
}

/// Location `mu` and dispersion `nu` of one COM-Poisson distribution.
///
/// `nu < 1` is overdispersed, `nu = 1` is Poisson(`mu`), `nu > 1` is
/// underdispersed. The mode is `floor(mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComPoissonParams<T = f64> {
    mu: T,
    nu: T,
}

impl<T: Real> ComPoissonParams<T> {
    pub fn new(mu: T, nu: T) -> Result<Self, ParamError> {
        if !(mu.is_finite() && mu > T::zero()) {
            return Err(ParamError::Mu(mu.to_f64().unwrap_or(f64::NAN)));
        }
        if !(nu.is_finite() && nu > T::zero()) {
            return Err(ParamError::Nu(nu.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(ComPoissonParams { mu, nu })
    }

    #[inline]
    pub fn mu(&self) -> T {
        self.mu
    }

    #[inline]
    pub fn nu(&self) -> T {
        self.nu
    }
}

/// Stopping rule for the truncated normalizing-constant sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct TruncationPolicy<T = f64> {
    /// A term smaller than `rel_tol` times the running sum ends the sum once
    /// the index is past `ceil(mu)`.
    pub rel_tol: T,
    pub max_terms: usize,
}

impl<T: Real> Default for TruncationPolicy<T> {
    fn default() -> Self {
        TruncationPolicy {
            rel_tol: T::lit(1e-12),
            max_terms: 100_000,
        }
    }
}

impl<T: Real> TruncationPolicy<T> {
    pub fn validate(&self) -> Result<(), TruncationError> {
        if !(self.rel_tol > T::zero() && self.rel_tol < T::one()) || self.max_terms == 0 {
            return Err(TruncationError::InvalidPolicy);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TruncationError {
    #[error("normalizing constant did not converge within {max_terms} terms (mu={mu}, nu={nu})")]
    NonConvergence { mu: f64, nu: f64, max_terms: usize },
    #[error("truncation policy needs 0 < rel_tol < 1 and max_terms >= 1")]
    InvalidPolicy,
}

/// `ln q(y | mu, nu) = nu * (y ln mu - ln y!)`.
#[inline]
pub fn log_q<T: Real>(y: u64, params: &ComPoissonParams<T>) -> T {
    log_q_raw(y, params.mu.ln(), params.nu)
}

/// [`log_q`] with `ln mu` precomputed.
#[inline]
pub(crate) fn log_q_raw<T: Real>(y: u64, ln_mu: T, nu: T) -> T {
    if y == 0 {
        return T::zero();
    }
    nu * (T::lit(y as f64) * ln_mu - T::ln_factorial(y))
}

/// Truncated normalizing constant together with the highest index summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated<T> {
    pub log_z: T,
    /// Last `y` included in the sum.
    pub last: u64,
}

/// `ln Z(mu, nu)` by a streaming log-sum-exp over `y = 0, 1, ...`.
pub fn log_z<T: Real>(
    params: &ComPoissonParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<T, TruncationError> {
    log_z_truncated(params, policy).map(|t| t.log_z)
}

pub fn log_z_truncated<T: Real>(
    params: &ComPoissonParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<Truncated<T>, TruncationError> {
    policy.validate()?;
    let ln_mu = params.mu.ln();
    let ln_tol = policy.rel_tol.ln();
    let past = params.mu.ceil().to_u64().unwrap_or(u64::MAX);
    let mut acc = LogSumExp::new();
    for y in 0..policy.max_terms as u64 {
        let term = log_q_raw(y, ln_mu, params.nu);
        acc.push(term);
        if y > past && term - acc.value() < ln_tol {
            return Ok(Truncated {
                log_z: acc.value(),
                last: y,
            });
        }
    }
    Err(TruncationError::NonConvergence {
        mu: params.mu.to_f64().unwrap_or(f64::NAN),
        nu: params.nu.to_f64().unwrap_or(f64::NAN),
        max_terms: policy.max_terms,
    })
}

/// Exact (truncated-oracle) probability mass.
pub fn pmf_exact<T: Real>(
    y: u64,
    params: &ComPoissonParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<T, TruncationError> {
    Ok((log_q(y, params) - log_z(params, policy)?).exp())
}

/// The whole truncated pmf, indexed by `y = 0..=last`.
pub fn pmf_table<T: Real>(
    params: &ComPoissonParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<Vec<T>, TruncationError> {
    let t = log_z_truncated(params, policy)?;
    Ok((0..=t.last)
        .map(|y| (log_q(y, params) - t.log_z).exp())
        .collect())
}

/// `mu + 1/(2 nu) - 1/2`. Can be negative for small `mu` with `nu < 1`; not clamped.
pub fn approx_mean<T: Real>(params: &ComPoissonParams<T>) -> T {
    let half = T::lit(0.5);
    params.mu + half / params.nu - half
}

/// `mu / nu`.
pub fn approx_var<T: Real>(params: &ComPoissonParams<T>) -> T {
    params.mu / params.nu
}

/// `ln(mu) / (2 nu) + mu (ln mu - 1)`, the asymptotic approximation to `E[ln Y!]`.
pub fn approx_e_log_factorial<T: Real>(params: &ComPoissonParams<T>) -> T {
    let ln_mu = params.mu.ln();
    ln_mu / (T::lit(2.0) * params.nu) + params.mu * (ln_mu - T::one())
}
