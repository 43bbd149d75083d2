//! GARMA(p, q) link recursions for the COM-Poisson location and dispersion.
//!
//! For `t > r = max(p, q)`:
//!
//! ```text
//! ln mu_t = sum_{j<=p} phi_j ln y*_{t-j} + sum_{j<=q} theta_j (ln y*_{t-j} - ln mu_{t-j})
//! ln nu_t = sum_{j<=p} delta_j ln y*_{t-j}
//! ```
//!
//! with `y* = max(y, c)` so zero counts never reach the logarithm. Presample
//! links (`t <= r`) are `mu_t = y*_t`, `nu_t = 1`, which makes the moving
//! average term vanish at the boundary.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compois::{log_q_raw, log_z, ComPoissonParams, TruncationError, TruncationPolicy};
use crate::real::Real;
use crate::sampler::{self, SamplerError};
use crate::series::CountSeries;

/// `ln mu_t` is clamped to `[-LOG_MU_CLAMP, LOG_MU_CLAMP]` before exponentiation.
pub const LOG_MU_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model needs p + q >= 1")]
    EmptyOrder,
    #[error("zero-replacement constant c must lie in (0, 1), got {0}")]
    ZeroReplacement(f64),
    #[error("series of length {len} is shorter than the {needed} lags the model needs")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("coefficient vector has length {got}, model order needs {expected}")]
    CoefficientLength { expected: usize, got: usize },
    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(usize),
    #[error(transparent)]
    Truncation(#[from] TruncationError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// Lags of the model plus the zero-replacement constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOrder<T = f64> {
    pub p: usize,
    pub q: usize,
    pub c: T,
}

impl<T: Real> ModelOrder<T> {
    pub fn new(p: usize, q: usize, c: T) -> Result<Self, ModelError> {
        let order = ModelOrder { p, q, c };
        order.validate()?;
        Ok(order)
    }

    /// GARMA(p, q) with the default `c = 0.1`.
    pub fn with_lags(p: usize, q: usize) -> Result<Self, ModelError> {
        Self::new(p, q, T::lit(0.1))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.p + self.q == 0 {
            return Err(ModelError::EmptyOrder);
        }
        if !(self.c > T::zero() && self.c < T::one()) {
            return Err(ModelError::ZeroReplacement(self.c.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }

    /// Index after which the partial likelihood starts.
    pub fn r(&self) -> usize {
        self.p.max(self.q)
    }

    /// Number of coefficients, `2p + q`.
    pub fn dimension(&self) -> usize {
        2 * self.p + self.q
    }

    /// Column names in the flat coefficient layout `phi.., theta.., delta..`.
    pub fn coefficient_names(&self) -> Vec<String> {
        (1..=self.p)
            .map(|j| format!("phi_{j}"))
            .chain((1..=self.q).map(|j| format!("theta_{j}")))
            .chain((1..=self.p).map(|j| format!("delta_{j}")))
            .collect()
    }

    #[inline]
    fn ln_ystar(&self, y: u64) -> T {
        let v = T::lit(y as f64);
        if v < self.c { self.c.ln() } else { v.ln() }
    }
}

/// Role of one entry in the flat coefficient layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientGroup {
    Phi,
    Theta,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarmaCoefficients<T = f64> {
    pub phi: Vec<T>,
    pub theta: Vec<T>,
    pub delta: Vec<T>,
}

impl<T: Real> GarmaCoefficients<T> {
    pub fn zeros(order: &ModelOrder<T>) -> Self {
        GarmaCoefficients {
            phi: vec![T::zero(); order.p],
            theta: vec![T::zero(); order.q],
            delta: vec![T::zero(); order.p],
        }
    }

    pub fn new(
        order: &ModelOrder<T>,
        phi: Vec<T>,
        theta: Vec<T>,
        delta: Vec<T>,
    ) -> Result<Self, ModelError> {
        let flat: Vec<T> = phi.iter().chain(&theta).chain(&delta).copied().collect();
        if phi.len() != order.p || theta.len() != order.q || delta.len() != order.p {
            return Err(ModelError::CoefficientLength {
                expected: order.dimension(),
                got: flat.len(),
            });
        }
        Self::from_flat(order, &flat)
    }

    /// Builds from the flat layout `phi_1..phi_p, theta_1..theta_q, delta_1..delta_p`.
    pub fn from_flat(order: &ModelOrder<T>, flat: &[T]) -> Result<Self, ModelError> {
        if flat.len() != order.dimension() {
            return Err(ModelError::CoefficientLength {
                expected: order.dimension(),
                got: flat.len(),
            });
        }
        if let Some(i) = flat.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteCoefficient(i));
        }
        let (phi, rest) = flat.split_at(order.p);
        let (theta, delta) = rest.split_at(order.q);
        Ok(GarmaCoefficients {
            phi: phi.to_vec(),
            theta: theta.to_vec(),
            delta: delta.to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.phi.iter().chain(&self.theta).chain(&self.delta).copied().collect()
    }

    pub fn groups(&self) -> impl Iterator<Item = CoefficientGroup> {
        std::iter::repeat_n(CoefficientGroup::Phi, self.phi.len())
            .chain(std::iter::repeat_n(CoefficientGroup::Theta, self.theta.len()))
            .chain(std::iter::repeat_n(CoefficientGroup::Delta, self.delta.len()))
    }

    fn check(&self, order: &ModelOrder<T>) -> Result<(), ModelError> {
        if self.phi.len() != order.p || self.theta.len() != order.q || self.delta.len() != order.p {
            return Err(ModelError::CoefficientLength {
                expected: order.dimension(),
                got: self.phi.len() + self.theta.len() + self.delta.len(),
            });
        }
        Ok(())
    }
}

/// The derived `{mu_t}`, `{nu_t}` for a coefficient vector and a history.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState<T = f64> {
    mu: Vec<T>,
    nu: Vec<T>,
    log_mu: Vec<T>,
    clamp_hits: usize,
}

impl<T: Real> LinkState<T> {
    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn nu(&self) -> &[T] {
        &self.nu
    }

    pub fn log_mu(&self) -> &[T] {
        &self.log_mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Times the `ln mu_t` clamp fired while building this state.
    pub fn clamp_hits(&self) -> usize {
        self.clamp_hits
    }

    /// Distribution parameters at (0-based) position `i`.
    pub fn params(&self, i: usize) -> ComPoissonParams<T> {
        ComPoissonParams::new(self.mu[i], self.nu[i]).expect("link state holds valid parameters")
    }
}

/// Incremental form of the recursion; shared by the likelihood, the
/// simulator and the one-step-ahead predictor.
pub(crate) struct Recursion<'a, T> {
    order: &'a ModelOrder<T>,
    coeffs: &'a GarmaCoefficients<T>,
    ln_ystar: Vec<T>,
    state: LinkState<T>,
}

impl<'a, T: Real> Recursion<'a, T> {
    pub(crate) fn new(
        order: &'a ModelOrder<T>,
        coeffs: &'a GarmaCoefficients<T>,
        capacity: usize,
    ) -> Self {
        Recursion {
            order,
            coeffs,
            ln_ystar: Vec::with_capacity(capacity),
            state: LinkState {
                mu: Vec::with_capacity(capacity),
                nu: Vec::with_capacity(capacity),
                log_mu: Vec::with_capacity(capacity),
                clamp_hits: 0,
            },
        }
    }

    /// Links for the next position given the history pushed so far.
    pub(crate) fn next_link(&self) -> (T, T, bool) {
        let t = self.ln_ystar.len();
        debug_assert!(t >= self.order.r(), "presample must be seeded first");
        let mut ln_mu = T::zero();
        for (j, &phi) in self.coeffs.phi.iter().enumerate() {
            ln_mu = ln_mu + phi * self.ln_ystar[t - 1 - j];
        }
        for (j, &theta) in self.coeffs.theta.iter().enumerate() {
            let k = t - 1 - j;
            ln_mu = ln_mu + theta * (self.ln_ystar[k] - self.state.log_mu[k]);
        }
        let mut ln_nu = T::zero();
        for (j, &delta) in self.coeffs.delta.iter().enumerate() {
            ln_nu = ln_nu + delta * self.ln_ystar[t - 1 - j];
        }
        let bound = T::lit(LOG_MU_CLAMP);
        let clamped = ln_mu > bound || ln_mu < -bound || ln_mu.is_nan();
        if clamped {
            ln_mu = if ln_mu.is_nan() { T::zero() } else { ln_mu.max(-bound).min(bound) };
        }
        (ln_mu, ln_nu, clamped)
    }

    fn push_presample(&mut self, y: u64) {
        let l = self.order.ln_ystar(y);
        self.ln_ystar.push(l);
        self.state.log_mu.push(l);
        self.state.mu.push(T::lit(y as f64).max(self.order.c));
        self.state.nu.push(T::one());
    }

    /// Computes the next link, records it, and returns the parameters.
    pub(crate) fn advance(&mut self) -> ComPoissonParams<T> {
        let (ln_mu, ln_nu, clamped) = self.next_link();
        if clamped {
            self.state.clamp_hits += 1;
        }
        let mu = ln_mu.exp();
        // keep nu strictly positive and finite for extreme dispersion predictors
        let ln_nu = if ln_nu.is_nan() { T::zero() } else { ln_nu };
        let nu = ln_nu.exp().max(T::min_positive_value()).min(T::max_value());
        self.state.log_mu.push(ln_mu);
        self.state.mu.push(mu);
        self.state.nu.push(nu);
        ComPoissonParams::new(mu, nu).expect("clamped links are valid")
    }

    /// Records the observation at the position just advanced.
    pub(crate) fn observe(&mut self, y: u64) {
        debug_assert_eq!(self.ln_ystar.len() + 1, self.state.mu.len());
        self.ln_ystar.push(self.order.ln_ystar(y));
    }

    pub(crate) fn seed(&mut self, presample: &[u64]) {
        for &y in presample {
            self.push_presample(y);
        }
    }

    pub(crate) fn into_state(self) -> LinkState<T> {
        self.state
    }
}

/// Runs the link recursion over the observed series.
pub fn link_forward<T: Real>(
    y: &[u64],
    coeffs: &GarmaCoefficients<T>,
    order: &ModelOrder<T>,
) -> Result<LinkState<T>, ModelError> {
    order.validate()?;
    coeffs.check(order)?;
    let r = order.r();
    if y.len() < r {
        return Err(ModelError::SeriesTooShort {
            len: y.len(),
            needed: r,
        });
    }
    let mut rec = Recursion::new(order, coeffs, y.len() + 1);
    rec.seed(&y[..r]);
    for &obs in &y[r..] {
        rec.advance();
        rec.observe(obs);
    }
    Ok(rec.into_state())
}

/// `sum_{t>r} nu_t (y_t ln mu_t - ln y_t!)`: the partial log-likelihood without
/// the normalizing constants.
pub fn log_partial_likelihood_unnorm<T: Real>(
    y: &[u64],
    state: &LinkState<T>,
    order: &ModelOrder<T>,
) -> T {
    (order.r()..y.len())
        .map(|i| log_q_raw(y[i], state.log_mu[i], state.nu[i]))
        .sum()
}

/// Partial log-likelihood including `- sum_{t>r} ln Z(mu_t, nu_t)` from the truncated oracle.
pub fn log_partial_likelihood_exact<T: Real>(
    y: &[u64],
    state: &LinkState<T>,
    order: &ModelOrder<T>,
    policy: &TruncationPolicy<T>,
) -> Result<T, ModelError> {
    let mut total = T::zero();
    for i in order.r()..y.len() {
        let lz = log_z(&state.params(i), policy)?;
        total = total + log_q_raw(y[i], state.log_mu[i], state.nu[i]) - lz;
    }
    Ok(total)
}

/// Generates a series of total length `n` whose first `r` values are the last
/// `r` entries of `presample`; each later value is an exact COM-Poisson draw
/// given its own history.
pub fn simulate_series<T: Real, R: Rng + ?Sized>(
    coeffs: &GarmaCoefficients<T>,
    order: &ModelOrder<T>,
    n: usize,
    presample: &[u64],
    rng: &mut R,
) -> Result<CountSeries, ModelError> {
    order.validate()?;
    coeffs.check(order)?;
    let r = order.r();
    if presample.len() < r {
        return Err(ModelError::SeriesTooShort {
            len: presample.len(),
            needed: r,
        });
    }
    if n < r.max(2) {
        return Err(ModelError::SeriesTooShort { len: n, needed: r.max(2) });
    }
    let mut values = presample[presample.len() - r..].to_vec();
    values.reserve(n - r);
    let mut rec = Recursion::new(order, coeffs, n);
    rec.seed(&values);
    while values.len() < n {
        let params = rec.advance();
        let y = sampler::draw(&params, rng)?.value;
        rec.observe(y);
        values.push(y);
    }
    Ok(CountSeries::new(values, "simulated", "").expect("n >= 2"))
}
