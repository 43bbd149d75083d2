//! One-step-ahead posterior predictive distribution and fitted `mu_t` paths.

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::compois::ComPoissonParams;
use crate::diagnostics::quantile_sorted;
use crate::garma::{link_forward, GarmaCoefficients, ModelError, ModelOrder, Recursion};
use crate::mcmc::PosteriorSample;
use crate::real::Real;
use crate::sampler;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictionError {
    #[error("no posterior samples")]
    NoSamples,
    #[error("draws per sample must be >= 1")]
    NoDraws,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Monte Carlo predictive pmf stored as exact counts; `prob(k)` is the
/// rational `count(k) / (N L)`, so the probabilities sum to one exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictivePmf {
    counts: Vec<u64>,
    pub draws_per_sample: usize,
    pub n_posterior: usize,
}

impl PredictivePmf {
    pub fn total(&self) -> u64 {
        (self.draws_per_sample * self.n_posterior) as u64
    }

    /// Largest count value drawn; the support is `0..=max_value()`.
    pub fn max_value(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(k as usize).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn prob(&self, k: u64) -> Ratio<u64> {
        Ratio::new(self.count(k), self.total())
    }

    pub fn prob_real<T: Real>(&self, k: u64) -> T {
        T::lit(self.count(k) as f64 / self.total() as f64)
    }

    /// `(k, p(k))` over the reported support.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Ratio<u64>)> + '_ {
        (0..self.counts.len() as u64).map(|k| (k, self.prob(k)))
    }
}

/// `(mu_{n+1}, nu_{n+1})` given the full observed series and one coefficient vector.
pub fn one_step_params<T: Real>(
    y: &[u64],
    coeffs: &GarmaCoefficients<T>,
    order: &ModelOrder<T>,
) -> Result<ComPoissonParams<T>, ModelError> {
    let r = order.r();
    if y.len() < r {
        return Err(ModelError::SeriesTooShort {
            len: y.len(),
            needed: r,
        });
    }
    // validates order and coefficient lengths
    link_forward(&y[..r], coeffs, order)?;
    let mut rec = Recursion::new(order, coeffs, y.len() + 1);
    rec.seed(&y[..r]);
    for &obs in &y[r..] {
        rec.advance();
        rec.observe(obs);
    }
    Ok(rec.advance())
}

/// For each posterior draw, `draws_per_sample` COM-Poisson draws at the
/// one-step-ahead links; the pmf is the pooled sample proportion.
pub fn predictive_pmf<T: Real, R: Rng + ?Sized>(
    y: &[u64],
    samples: &[PosteriorSample<T>],
    order: &ModelOrder<T>,
    draws_per_sample: usize,
    rng: &mut R,
) -> Result<PredictivePmf, PredictionError> {
    if samples.is_empty() {
        return Err(PredictionError::NoSamples);
    }
    if draws_per_sample == 0 {
        return Err(PredictionError::NoDraws);
    }
    let mut counts: Vec<u64> = Vec::new();
    for s in samples {
        let params = one_step_params(y, &s.coeffs, order)?;
        let env = sampler::build_envelope(&params);
        for _ in 0..draws_per_sample {
            let v = sampler::draw_with(&params, &env, rng).map_err(ModelError::from)?.value as usize;
            if counts.len() <= v {
                counts.resize(v + 1, 0);
            }
            counts[v] += 1;
        }
    }
    Ok(PredictivePmf {
        counts,
        draws_per_sample,
        n_posterior: samples.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuPathPoint<T = f64> {
    /// 1-based time index.
    pub t: usize,
    pub y: u64,
    pub mean: T,
    pub lower: T,
    pub upper: T,
}

/// Posterior mean and 2.5%/97.5% quantiles of `mu_t` for `t = r+1..n`.
pub fn fitted_mu_path<T: Real>(
    y: &[u64],
    samples: &[PosteriorSample<T>],
    order: &ModelOrder<T>,
) -> Result<Vec<MuPathPoint<T>>, PredictionError> {
    if samples.is_empty() {
        return Err(PredictionError::NoSamples);
    }
    let r = order.r();
    let paths = samples
        .iter()
        .map(|s| link_forward(y, &s.coeffs, order).map(|st| st.mu().to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    let n_s = T::lit(samples.len() as f64);
    let mut column = Vec::with_capacity(samples.len());
    Ok((r..y.len())
        .map(|i| {
            column.clear();
            column.extend(paths.iter().map(|p| p[i]));
            let mean = column.iter().copied().sum::<T>() / n_s;
            column.sort_by(|a, b| a.partial_cmp(b).expect("finite mu"));
            MuPathPoint {
                t: i + 1,
                y: y[i],
                mean,
                lower: quantile_sorted(&column, T::lit(0.025)),
                upper: quantile_sorted(&column, T::lit(0.975)),
            }
        })
        .collect())
}
