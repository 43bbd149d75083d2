//! Posterior simulation for GARMA coefficients.
//!
//! The exchange kernel augments each proposal `theta'` with auxiliary counts
//! drawn from the likelihood at `theta'`. In the acceptance ratio the
//! intractable `prod Z(mu'_t, nu'_t)` is replaced by the ratio
//! `prod q(y'_t | theta) / q(y'_t | theta')`, so no normalizing constant is
//! ever evaluated. [`direct_mh_step`] is the textbook Metropolis-Hastings
//! update on the truncated exact likelihood; it exists as an oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compois::{log_q_raw, TruncationError, TruncationPolicy};
use crate::garma::{
    link_forward, log_partial_likelihood_exact, log_partial_likelihood_unnorm, CoefficientGroup,
    GarmaCoefficients, LinkState, ModelError, ModelOrder, Recursion,
};
use crate::real::Real;
use crate::sampler::{self, SamplerError};

/// Independent zero-mean normal priors, one standard deviation per coefficient group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PriorSpec<T = f64> {
    pub sd_phi: T,
    pub sd_theta: T,
    pub sd_delta: T,
}

impl<T: Real> Default for PriorSpec<T> {
    fn default() -> Self {
        let sd = T::lit(10f64.sqrt());
        PriorSpec {
            sd_phi: sd,
            sd_theta: sd,
            sd_delta: sd,
        }
    }
}

impl<T: Real> PriorSpec<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, sd) in [
            ("sd_phi", self.sd_phi),
            ("sd_theta", self.sd_theta),
            ("sd_delta", self.sd_delta),
        ] {
            if !(sd.is_finite() && sd > T::zero()) {
                return Err(ConfigError::Prior(name));
            }
        }
        Ok(())
    }

    fn sd(&self, group: CoefficientGroup) -> T {
        match group {
            CoefficientGroup::Phi => self.sd_phi,
            CoefficientGroup::Theta => self.sd_theta,
            CoefficientGroup::Delta => self.sd_delta,
        }
    }
}

pub fn log_prior<T: Real>(coeffs: &GarmaCoefficients<T>, prior: &PriorSpec<T>) -> T {
    let half_ln_2pi = T::lit(0.5 * (2.0 * std::f64::consts::PI).ln());
    let half = T::lit(0.5);
    coeffs
        .to_flat()
        .into_iter()
        .zip(coeffs.groups())
        .map(|(v, g)| {
            let sd = prior.sd(g);
            let z = v / sd;
            -half_ln_2pi - sd.ln() - half * z * z
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("prior field {0} must be finite and > 0")]
    Prior(&'static str),
    #[error("iterations must be >= 1")]
    Iterations,
    #[error("burn_in ({burn_in}) must be smaller than iterations ({iterations})")]
    BurnIn { burn_in: usize, iterations: usize },
    #[error("thin must be >= 1")]
    Thin,
    #[error("adapt_interval must be >= 1")]
    AdaptInterval,
    #[error("target_accept must lie in (0, 1)")]
    TargetAccept,
    #[error("initial_step_sizes has {got} entries, the model has {expected} coefficients")]
    StepSizeCount { expected: usize, got: usize },
    #[error("step sizes must be finite and >= 0")]
    StepSizeValue,
}

/// Run schedule and proposal tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct McmcConfig<T = f64> {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub target_accept: T,
    pub seed: u64,
    /// One random-walk scale per coefficient; empty means 0.1 for all. A zero
    /// entry holds that coefficient fixed at its initial value.
    pub initial_step_sizes: Vec<T>,
    pub adapt_interval: usize,
    /// Once, halfway through burn-in, make the step sizes proportional to
    /// each coefficient's standard deviation over the second quarter of
    /// burn-in (geometric mean unchanged). When false only the common
    /// rescaling is applied.
    pub adapt_scales: bool,
}

impl<T: Real> Default for McmcConfig<T> {
    fn default() -> Self {
        McmcConfig {
            iterations: 100_000,
            burn_in: 50_000,
            thin: 10,
            target_accept: T::lit(0.48),
            seed: 0,
            initial_step_sizes: Vec::new(),
            adapt_interval: 100,
            adapt_scales: true,
        }
    }
}

impl<T: Real> McmcConfig<T> {
    pub fn validate(&self, dimension: usize) -> Result<(), ConfigError> {
        if self.iterations == 0 {
            return Err(ConfigError::Iterations);
        }
        if self.burn_in >= self.iterations {
            return Err(ConfigError::BurnIn {
                burn_in: self.burn_in,
                iterations: self.iterations,
            });
        }
        if self.thin == 0 {
            return Err(ConfigError::Thin);
        }
        if self.adapt_interval == 0 {
            return Err(ConfigError::AdaptInterval);
        }
        if !(self.target_accept > T::zero() && self.target_accept < T::one()) {
            return Err(ConfigError::TargetAccept);
        }
        if !self.initial_step_sizes.is_empty() && self.initial_step_sizes.len() != dimension {
            return Err(ConfigError::StepSizeCount {
                expected: dimension,
                got: self.initial_step_sizes.len(),
            });
        }
        if self.initial_step_sizes.iter().any(|s| !(s.is_finite() && *s >= T::zero())) {
            return Err(ConfigError::StepSizeValue);
        }
        Ok(())
    }

    pub fn step_sizes(&self, dimension: usize) -> Vec<T> {
        if self.initial_step_sizes.is_empty() {
            vec![T::lit(0.1); dimension]
        } else {
            self.initial_step_sizes.clone()
        }
    }

    /// Number of samples a run keeps.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// One retained draw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSample<T = f64> {
    pub coeffs: GarmaCoefficients<T>,
    pub iteration: usize,
    pub log_prior: T,
    /// `sum_{t>r} ln q(y_t | F_{t-1})` at these coefficients.
    pub log_q_sum: T,
}

impl<T: Real> PosteriorSample<T> {
    /// Evaluates prior and unnormalized likelihood at `coeffs`.
    pub fn at(
        coeffs: GarmaCoefficients<T>,
        iteration: usize,
        y: &[u64],
        order: &ModelOrder<T>,
        prior: &PriorSpec<T>,
    ) -> Result<Self, ModelError> {
        let state = link_forward(y, &coeffs, order)?;
        Ok(PosteriorSample {
            log_prior: log_prior(&coeffs, prior),
            log_q_sum: log_partial_likelihood_unnorm(y, &state, order),
            coeffs,
            iteration,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainResult<T = f64> {
    pub samples: Vec<PosteriorSample<T>>,
    /// Acceptance rate over post-burn-in iterations.
    pub accept_rate: T,
    pub step_sizes_final: Vec<T>,
    /// Link evaluations that hit the `ln mu` clamp, summed over proposals.
    pub clamp_hits: usize,
    /// Proposals rejected because auxiliary generation hit the sampler cap.
    pub sampler_cap_rejections: usize,
    /// Direct-kernel proposals rejected because the truncated normalizing
    /// constant did not converge within the term cap.
    pub truncation_rejections: usize,
}

/// How the exchange kernel builds auxiliary data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxiliaryLinks {
    /// `y'_t ~ CMP(mu'_t, nu'_t)` with links computed from the observed series
    /// under `theta'`. Every normalizing constant of the observed-data
    /// likelihood is matched one to one, so the chain targets the exact posterior.
    #[default]
    Observed,
    /// Links recomputed along the auxiliary path itself (`F*`), lags seeded
    /// with observed `y_1..y_r`. The constants do not cancel exactly; kept
    /// for comparison.
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub enum Kernel<T = f64> {
    Exchange {
        #[serde(default)]
        aux: AuxiliaryLinks,
    },
    Direct {
        #[serde(default)]
        policy: TruncationPolicy<T>,
    },
}

impl<T: Real> Default for Kernel<T> {
    fn default() -> Self {
        Kernel::exchange()
    }
}

impl<T: Real> Kernel<T> {
    pub fn exchange() -> Self {
        Kernel::Exchange {
            aux: AuxiliaryLinks::Observed,
        }
    }

    pub fn direct() -> Self {
        Kernel::Direct {
            policy: TruncationPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McmcError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("iteration {iteration}: {source}")]
    Step {
        iteration: usize,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T = f64> {
    pub sample: PosteriorSample<T>,
    pub accepted: bool,
    pub clamp_hits: usize,
    /// The proposal was rejected because auxiliary generation hit the sampler cap.
    pub sampler_cap: bool,
    /// The proposal was rejected because its normalizing constant did not converge.
    pub truncation_failed: bool,
}

/// Chain position with the quantities each kernel reuses.
struct Point<T> {
    sample: PosteriorSample<T>,
    state: LinkState<T>,
    /// Exact log-likelihood, direct kernel only.
    log_lik_exact: Option<T>,
}

fn propose<T: Real, R: Rng + ?Sized>(
    current: &GarmaCoefficients<T>,
    order: &ModelOrder<T>,
    step_sizes: &[T],
    rng: &mut R,
) -> Result<GarmaCoefficients<T>, ModelError> {
    let flat: Vec<T> = current
        .to_flat()
        .into_iter()
        .zip(step_sizes)
        .map(|(v, &s)| {
            let z: f64 = rng.sample(StandardNormal);
            v + s * T::lit(z)
        })
        .collect();
    GarmaCoefficients::from_flat(order, &flat)
}

#[inline]
fn accept<T: Real, R: Rng + ?Sized>(log_a: T, rng: &mut R) -> bool {
    if log_a.is_nan() {
        return false;
    }
    let u = 1.0 - rng.random::<f64>();
    log_a >= T::zero() || T::lit(u.ln()) < log_a
}

fn log_q_sum_state<T: Real>(data: &[u64], state: &LinkState<T>, r: usize) -> T {
    (r..data.len())
        .map(|i| log_q_raw(data[i], state.log_mu()[i], state.nu()[i]))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn exchange_inner<T: Real, R: Rng + ?Sized>(
    current: &Point<T>,
    y: &[u64],
    order: &ModelOrder<T>,
    prior: &PriorSpec<T>,
    step_sizes: &[T],
    aux: AuxiliaryLinks,
    next_iteration: usize,
    rng: &mut R,
) -> Result<(Point<T>, StepOutcome<T>), ModelError> {
    let r = order.r();
    let coeffs = propose(&current.sample.coeffs, order, step_sizes, rng)?;
    let state = link_forward(y, &coeffs, order)?;
    let mut clamp_hits = state.clamp_hits();
    let log_q_prop = log_partial_likelihood_unnorm(y, &state, order);
    let log_prior_prop = log_prior(&coeffs, prior);

    // Auxiliary counts at theta'. `aux_ratio` accumulates
    // ln q(y'_t | current links) - ln q(y'_t | auxiliary links).
    let mut aux_ratio = T::zero();
    let mut capped = false;
    match aux {
        AuxiliaryLinks::Observed => {
            for i in r..y.len() {
                let params = state.params(i);
                match sampler::draw(&params, rng) {
                    Ok(d) => {
                        aux_ratio = aux_ratio
                            + log_q_raw(d.value, current.state.log_mu()[i], current.state.nu()[i])
                            - log_q_raw(d.value, state.log_mu()[i], state.nu()[i]);
                    }
                    Err(SamplerError::AttemptCap { .. }) => {
                        capped = true;
                        break;
                    }
                }
            }
        }
        AuxiliaryLinks::Recursive => {
            let mut rec = Recursion::new(order, &coeffs, y.len());
            rec.seed(&y[..r]);
            for i in r..y.len() {
                let params = rec.advance();
                match sampler::draw(&params, rng) {
                    Ok(d) => {
                        aux_ratio = aux_ratio
                            + log_q_raw(d.value, current.state.log_mu()[i], current.state.nu()[i])
                            - log_q_raw(d.value, params.mu().ln(), params.nu());
                        rec.observe(d.value);
                    }
                    Err(SamplerError::AttemptCap { .. }) => {
                        capped = true;
                        break;
                    }
                }
            }
            clamp_hits += rec.into_state().clamp_hits();
        }
    }

    let accepted = !capped && {
        let log_a = (log_q_prop - current.sample.log_q_sum) + aux_ratio
            + (log_prior_prop - current.sample.log_prior);
        accept(log_a, rng)
    };
    let point = if accepted {
        Point {
            sample: PosteriorSample {
                coeffs,
                iteration: next_iteration,
                log_prior: log_prior_prop,
                log_q_sum: log_q_prop,
            },
            state,
            log_lik_exact: None,
        }
    } else {
        Point {
            sample: PosteriorSample {
                iteration: next_iteration,
                ..current.sample.clone()
            },
            state: current.state.clone(),
            log_lik_exact: None,
        }
    };
    let outcome = StepOutcome {
        sample: point.sample.clone(),
        accepted,
        clamp_hits,
        sampler_cap: capped,
        truncation_failed: false,
    };
    Ok((point, outcome))
}

#[allow(clippy::too_many_arguments)]
fn direct_inner<T: Real, R: Rng + ?Sized>(
    current: &Point<T>,
    y: &[u64],
    order: &ModelOrder<T>,
    prior: &PriorSpec<T>,
    policy: &TruncationPolicy<T>,
    step_sizes: &[T],
    next_iteration: usize,
    rng: &mut R,
) -> Result<(Point<T>, StepOutcome<T>), ModelError> {
    let current_exact = match current.log_lik_exact {
        Some(v) => v,
        None => log_partial_likelihood_exact(y, &current.state, order, policy)?,
    };
    let coeffs = propose(&current.sample.coeffs, order, step_sizes, rng)?;
    let state = link_forward(y, &coeffs, order)?;
    let clamp_hits = state.clamp_hits();
    let (exact_prop, truncation_failed) =
        match log_partial_likelihood_exact(y, &state, order, policy) {
            Ok(v) => (v, false),
            Err(ModelError::Truncation(TruncationError::NonConvergence { .. })) => {
                (T::neg_infinity(), true)
            }
            Err(e) => return Err(e),
        };
    let log_prior_prop = log_prior(&coeffs, prior);
    let accepted = !truncation_failed && {
        let log_a = (exact_prop - current_exact) + (log_prior_prop - current.sample.log_prior);
        accept(log_a, rng)
    };
    let point = if accepted {
        Point {
            sample: PosteriorSample {
                log_q_sum: log_q_sum_state(y, &state, order.r()),
                coeffs,
                iteration: next_iteration,
                log_prior: log_prior_prop,
            },
            state,
            log_lik_exact: Some(exact_prop),
        }
    } else {
        Point {
            sample: PosteriorSample {
                iteration: next_iteration,
                ..current.sample.clone()
            },
            state: current.state.clone(),
            log_lik_exact: Some(current_exact),
        }
    };
    let outcome = StepOutcome {
        sample: point.sample.clone(),
        accepted,
        clamp_hits,
        sampler_cap: false,
        truncation_failed,
    };
    Ok((point, outcome))
}

fn point_from<T: Real>(
    current: &PosteriorSample<T>,
    y: &[u64],
    order: &ModelOrder<T>,
) -> Result<Point<T>, ModelError> {
    Ok(Point {
        sample: current.clone(),
        state: link_forward(y, &current.coeffs, order)?,
        log_lik_exact: None,
    })
}

/// One exchange-algorithm update with auxiliary data drawn on the observed links.
pub fn exchange_step<T: Real, R: Rng + ?Sized>(
    current: &PosteriorSample<T>,
    y: &[u64],
    order: &ModelOrder<T>,
    prior: &PriorSpec<T>,
    step_sizes: &[T],
    rng: &mut R,
) -> Result<StepOutcome<T>, ModelError> {
    exchange_step_with(current, y, order, prior, step_sizes, AuxiliaryLinks::Observed, rng)
}

pub fn exchange_step_with<T: Real, R: Rng + ?Sized>(
    current: &PosteriorSample<T>,
    y: &[u64],
    order: &ModelOrder<T>,
    prior: &PriorSpec<T>,
    step_sizes: &[T],
    aux: AuxiliaryLinks,
    rng: &mut R,
) -> Result<StepOutcome<T>, ModelError> {
    let point = point_from(current, y, order)?;
    let next = current.iteration + 1;
    exchange_inner(&point, y, order, prior, step_sizes, aux, next, rng).map(|(_, o)| o)
}

/// Metropolis-Hastings on the truncated exact likelihood. A proposal whose
/// normalizing constant fails to converge is rejected.
pub fn direct_mh_step<T: Real, R: Rng + ?Sized>(
    current: &PosteriorSample<T>,
    y: &[u64],
    order: &ModelOrder<T>,
    prior: &PriorSpec<T>,
    policy: &TruncationPolicy<T>,
    step_sizes: &[T],
    rng: &mut R,
) -> Result<StepOutcome<T>, ModelError> {
    let point = point_from(current, y, order)?;
    let next = current.iteration + 1;
    direct_inner(&point, y, order, prior, policy, step_sizes, next, rng).map(|(_, o)| o)
}

/// Running moments of the flat coefficient vector.
struct Moments<T> {
    n: usize,
    mean: Vec<T>,
    m2: Vec<T>,
}

impl<T: Real> Moments<T> {
    fn new(dim: usize) -> Self {
        Moments {
            n: 0,
            mean: vec![T::zero(); dim],
            m2: vec![T::zero(); dim],
        }
    }

    fn push(&mut self, x: &[T]) {
        self.n += 1;
        let n = T::lit(self.n as f64);
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m = *m + d / n;
            *s = *s + d * (v - *m);
        }
    }

    fn sd(&self) -> Vec<T> {
        let denom = T::lit(self.n.saturating_sub(1).max(1) as f64);
        self.m2.iter().map(|&s| (s / denom).sqrt()).collect()
    }
}

/// Step sizes proportional to `sd`, with the geometric mean of the moving
/// steps preserved. Coordinates with a zero step or zero spread keep their step.
fn reshape_steps<T: Real>(steps: &mut [T], sd: &[T]) {
    let active: Vec<usize> = (0..steps.len())
        .filter(|&j| steps[j] > T::zero() && sd[j] > T::zero() && sd[j].is_finite())
        .collect();
    if active.len() < 2 {
        return;
    }
    let k = T::lit(active.len() as f64);
    let log_geo = |v: &[T]| active.iter().map(|&j| v[j].ln()).sum::<T>() / k;
    let shift = log_geo(steps) - log_geo(sd);
    for &j in &active {
        steps[j] = (sd[j].ln() + shift).exp();
    }
}

/// Runs a random-walk chain from all-zero coefficients.
///
/// During burn-in every `adapt_interval` iterations all step sizes are
/// multiplied by `exp(a - target_accept)` with `a` the acceptance rate of
/// the window; if `adapt_scales` is set their relative sizes are also
/// matched once to the coefficient spreads seen so far (see [`McmcConfig`]).
/// Step sizes are frozen afterwards. Iteration `i` (1-based) is
/// retained when `i > burn_in` and `(i - burn_in) % thin == 0`.
pub fn run_chain<T: Real>(
    y: &[u64],
    order: &ModelOrder<T>,
    prior: &PriorSpec<T>,
    config: &McmcConfig<T>,
    kernel: &Kernel<T>,
) -> Result<ChainResult<T>, McmcError> {
    order.validate()?;
    prior.validate()?;
    config.validate(order.dimension())?;
    if let Kernel::Direct { policy } = kernel {
        policy.validate().map_err(ModelError::from)?;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut steps = config.step_sizes(order.dimension());

    let start = PosteriorSample::at(GarmaCoefficients::zeros(order), 0, y, order, prior)?;
    let mut point = point_from(&start, y, order)?;

    let mut samples = Vec::with_capacity(config.retained());
    let mut window_accepts = 0usize;
    let mut post_accepts = 0usize;
    let mut clamp_hits = point.state.clamp_hits();
    let mut sampler_cap_rejections = 0usize;
    let mut truncation_rejections = 0usize;
    let (shape_from, shape_at) = (config.burn_in / 4, config.burn_in / 2);
    let mut moments = Moments::new(order.dimension());

    for i in 1..=config.iterations {
        let result = match kernel {
            Kernel::Exchange { aux } => {
                exchange_inner(&point, y, order, prior, &steps, *aux, i, &mut rng)
            }
            Kernel::Direct { policy } => {
                direct_inner(&point, y, order, prior, policy, &steps, i, &mut rng)
            }
        };
        let (next, outcome) = result.map_err(|source| McmcError::Step {
            iteration: i,
            source,
        })?;
        point = next;
        clamp_hits += outcome.clamp_hits;
        sampler_cap_rejections += usize::from(outcome.sampler_cap);
        truncation_rejections += usize::from(outcome.truncation_failed);

        if i <= config.burn_in {
            if config.adapt_scales && i > shape_from && i <= shape_at {
                moments.push(&point.sample.coeffs.to_flat());
                if i == shape_at && moments.n >= 2 * config.adapt_interval {
                    reshape_steps(&mut steps, &moments.sd());
                }
            }
            window_accepts += usize::from(outcome.accepted);
            if i % config.adapt_interval == 0 {
                let rate = T::lit(window_accepts as f64 / config.adapt_interval as f64);
                let factor = (rate - config.target_accept).exp();
                steps.iter_mut().for_each(|s| *s = *s * factor);
                window_accepts = 0;
            }
        } else {
            post_accepts += usize::from(outcome.accepted);
            if (i - config.burn_in).is_multiple_of(config.thin) {
                samples.push(point.sample.clone());
            }
        }
    }

    Ok(ChainResult {
        samples,
        accept_rate: T::lit(post_accepts as f64 / (config.iterations - config.burn_in) as f64),
        step_sizes_final: steps,
        clamp_hits,
        sampler_cap_rejections,
        truncation_rejections,
    })
}

/// Independent chains on worker threads; chain `k` uses seed `config.seed + k`.
pub fn run_chains<T: Real>(
    y: &[u64],
    order: &ModelOrder<T>,
    prior: &PriorSpec<T>,
    config: &McmcConfig<T>,
    kernel: &Kernel<T>,
    chains: usize,
) -> Result<Vec<ChainResult<T>>, McmcError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains as u64)
            .map(|k| {
                let cfg = McmcConfig {
                    seed: config.seed.wrapping_add(k),
                    ..config.clone()
                };
                scope.spawn(move || run_chain(y, order, prior, &cfg, kernel))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::garma::simulate_series;

    fn order11() -> ModelOrder<f64> {
        ModelOrder::with_lags(1, 1).unwrap()
    }

    fn synthetic(n: usize, seed: u64) -> Vec<u64> {
        let order = order11();
        let coeffs = GarmaCoefficients::new(&order, vec![0.5], vec![0.2], vec![-0.2]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        simulate_series(&coeffs, &order, n, &[1], &mut rng).unwrap().into_values()
    }

    #[test]
    fn log_prior_examples() {
        let order = ModelOrder::<f64>::with_lags(1, 0).unwrap();
        let unit = PriorSpec {
            sd_phi: 1.0,
            sd_theta: 1.0,
            sd_delta: 1.0,
        };
        let c = GarmaCoefficients::new(&order, vec![1.0], vec![], vec![0.0]).unwrap();
        let expected = -(2.0 * std::f64::consts::PI).ln() - 0.5;
        assert!((log_prior(&c, &unit) - expected).abs() < 1e-14);
        let single = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5;
        assert!((single - (-1.418939)).abs() < 1e-6);

        let prior = PriorSpec::default();
        let zero = GarmaCoefficients::zeros(&order);
        let at_zero = log_prior(&zero, &prior);
        assert!((at_zero - 2.0 * (-0.5 * (2.0 * std::f64::consts::PI * 10.0).ln())).abs() < 1e-12);
        let mut last = at_zero;
        for v in [0.3, 0.6, 1.2, 2.4] {
            let c = GarmaCoefficients::new(&order, vec![v], vec![], vec![v]).unwrap();
            let lp = log_prior(&c, &prior);
            assert!(lp < last);
            last = lp;
        }
    }

    #[test]
    fn config_validation() {
        let mut c = McmcConfig::<f64>::default();
        assert!(c.validate(3).is_ok());
        assert_eq!(c.retained(), 5000);
        c.burn_in = c.iterations;
        assert!(matches!(c.validate(3), Err(ConfigError::BurnIn { .. })));
        let c = McmcConfig::<f64> {
            initial_step_sizes: vec![0.1, 0.1],
            ..Default::default()
        };
        assert!(matches!(c.validate(3), Err(ConfigError::StepSizeCount { .. })));
        let c = McmcConfig::<f64> {
            thin: 0,
            ..Default::default()
        };
        assert_eq!(c.validate(3), Err(ConfigError::Thin));
    }

    #[test]
    fn zero_step_exchange_is_always_accepted() {
        let y = synthetic(150, 1);
        let order = order11();
        let prior = PriorSpec::default();
        let coeffs = GarmaCoefficients::new(&order, vec![0.4], vec![0.1], vec![-0.1]).unwrap();
        let current = PosteriorSample::at(coeffs, 0, &y, &order, &prior).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..50 {
            let out = exchange_step(&current, &y, &order, &prior, &[0.0; 3], &mut rng).unwrap();
            assert!(out.accepted);
            let out = direct_mh_step(
                &current,
                &y,
                &order,
                &prior,
                &TruncationPolicy::default(),
                &[0.0; 3],
                &mut rng,
            )
            .unwrap();
            assert!(out.accepted);
        }
    }

    #[test]
    fn retained_count_and_determinism() {
        let y = synthetic(60, 4);
        let order = order11();
        let config = McmcConfig {
            iterations: 1_003,
            burn_in: 500,
            thin: 10,
            seed: 17,
            ..Default::default()
        };
        let a = run_chain(&y, &order, &PriorSpec::default(), &config, &Kernel::exchange()).unwrap();
        assert_eq!(a.samples.len(), 50);
        assert_eq!(a.samples[0].iteration, 510);
        let b = run_chain(&y, &order, &PriorSpec::default(), &config, &Kernel::exchange()).unwrap();
        assert_eq!(a, b);
        let chains =
            run_chains(&y, &order, &PriorSpec::default(), &config, &Kernel::exchange(), 2).unwrap();
        assert_eq!(chains[0], a);
        assert_ne!(chains[1], a);
    }

    #[test]
    fn reshape_matches_spread_and_keeps_level() {
        let mut steps: Vec<f64> = vec![0.1, 0.1, 0.0, 0.4];
        reshape_steps(&mut steps, &[1.0, 4.0, 2.0, 2.0]);
        assert_eq!(steps[2], 0.0);
        assert!((steps[1] / steps[0] - 4.0).abs() < 1e-12);
        assert!((steps[3] / steps[0] - 2.0).abs() < 1e-12);
        let geo = |v: &[f64]| (v[0] * v[1] * v[3]).cbrt();
        assert!((geo(&steps) - geo(&[0.1, 0.1, 0.0, 0.4])).abs() < 1e-12);

        let mut one: Vec<f64> = vec![0.3, 0.0];
        reshape_steps(&mut one, &[2.0, 5.0]);
        assert_eq!(one, vec![0.3, 0.0]);
    }

    #[test]
    fn common_rescaling_only_keeps_ratios() {
        let y = synthetic(80, 5);
        let order = order11();
        let config = McmcConfig {
            iterations: 3000,
            burn_in: 2000,
            seed: 2,
            initial_step_sizes: vec![0.1, 0.2, 0.05],
            adapt_scales: false,
            ..Default::default()
        };
        let res = run_chain(&y, &order, &PriorSpec::default(), &config, &Kernel::exchange()).unwrap();
        let s = &res.step_sizes_final;
        assert!((s[1] / s[0] - 2.0).abs() < 1e-12 && (s[2] / s[0] - 0.5).abs() < 1e-12);
        let adapted = McmcConfig { adapt_scales: true, ..config };
        let res = run_chain(&y, &order, &PriorSpec::default(), &adapted, &Kernel::exchange()).unwrap();
        assert!((res.step_sizes_final[1] / res.step_sizes_final[0] - 2.0).abs() > 1e-6);
    }

    #[test]
    fn step_sizes_freeze_after_burn_in() {
        let y = synthetic(80, 5);
        let order = order11();
        let prior = PriorSpec::default();
        let long = McmcConfig {
            iterations: 2_000,
            burn_in: 1_000,
            thin: 1,
            seed: 3,
            ..Default::default()
        };
        let short = McmcConfig {
            iterations: 1_001,
            ..long.clone()
        };
        let a = run_chain(&y, &order, &prior, &long, &Kernel::exchange()).unwrap();
        let b = run_chain(&y, &order, &prior, &short, &Kernel::exchange()).unwrap();
        assert_eq!(a.step_sizes_final, b.step_sizes_final);
        assert_ne!(a.step_sizes_final, vec![0.1; 3]);
    }

    #[test]
    fn tight_prior_pins_coefficient() {
        let y = synthetic(150, 6);
        let order = order11();
        let prior = PriorSpec {
            sd_theta: 1e-3,
            ..Default::default()
        };
        let config = McmcConfig {
            iterations: 4_000,
            burn_in: 2_000,
            thin: 2,
            seed: 8,
            ..Default::default()
        };
        let res = run_chain(&y, &order, &prior, &config, &Kernel::exchange()).unwrap();
        let max = res
            .samples
            .iter()
            .map(|s| s.coeffs.theta[0].abs())
            .fold(0.0, f64::max);
        assert!(max < 5e-3, "{max}");
    }

    #[test]
    fn prior_only_chain_recovers_prior_moments() {
        // n = r leaves an empty likelihood
        let order = ModelOrder::<f64>::with_lags(2, 2).unwrap();
        let y = [3, 1];
        let prior = PriorSpec {
            sd_phi: 1.0,
            sd_theta: 2.0,
            sd_delta: 0.5,
        };
        let config = McmcConfig {
            iterations: 60_000,
            burn_in: 10_000,
            thin: 5,
            seed: 21,
            initial_step_sizes: vec![1.0; 6],
            ..Default::default()
        };
        let res = run_chain(&y, &order, &prior, &config, &Kernel::exchange()).unwrap();
        let sds = [1.0, 1.0, 2.0, 2.0, 0.5, 0.5];
        for (k, &sd) in sds.iter().enumerate() {
            let xs: Vec<f64> = res.samples.iter().map(|s| s.coeffs.to_flat()[k]).collect();
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
            // loose: thinned draws are still correlated
            assert!(m.abs() < 0.15 * sd, "coef {k} mean {m}");
            assert!((v.sqrt() / sd - 1.0).abs() < 0.1, "coef {k} sd {}", v.sqrt());
        }
    }
}
