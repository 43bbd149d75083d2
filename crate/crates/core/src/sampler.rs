//! Exact COM-Poisson draws by rejection from a Poisson or geometric envelope.
//!
//! With `q` the unnormalized COM-Poisson mass and `q_g` the unnormalized
//! envelope mass, the bounding constant `B = sup_y q(y) / q_g(y)` is
//! available in closed form, and a proposal `y*` is accepted with
//! probability `q(y*) / (B q_g(y*))`. Neither normalizing constant is needed.
//!
//! * `nu >= 1`: Poisson(`mu`) envelope, `B = (mu^m / m!)^(nu - 1)`, `m = floor(mu)`.
//! * `nu < 1`: Geometric(`p`) envelope on `{0, 1, ...}` with
//!   `p = 2 nu / (2 mu nu + 1 + nu)` and
//!   `B = (mu^l / l!)^nu / ((1 - p)^l p)`, `l = floor(mu / (1 - p)^(1/nu))`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use thiserror::Error;

use crate::compois::{log_q, ComPoissonParams};
use crate::real::Real;

/// Proposals allowed per draw before the sampler reports a defect.
pub const MAX_ATTEMPTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("rejection sampler exceeded {MAX_ATTEMPTS} proposals (mu={mu}, nu={nu})")]
    AttemptCap { mu: f64, nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EnvelopeKind<T> {
    Poisson,
    Geometric { p: T, lambda: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope<T = f64> {
    pub kind: EnvelopeKind<T>,
    /// `ln B`.
    pub log_b: T,
}

impl<T: Real> Envelope<T> {
    /// Unnormalized envelope mass `ln q_g(y)` for envelopes built from `params`.
    pub fn log_qg(&self, y: u64, params: &ComPoissonParams<T>) -> T {
        match self.kind {
            EnvelopeKind::Poisson => {
                if y == 0 {
                    T::zero()
                } else {
                    T::lit(y as f64) * params.mu().ln() - T::ln_factorial(y)
                }
            }
            EnvelopeKind::Geometric { p, .. } => T::lit(y as f64) * (-p).ln_1p() + p.ln(),
        }
    }
}

/// Geometric success probability matching the envelope mean `(1-p)/p` to `mu + 1/(2nu) - 1/2`.
pub fn geometric_p<T: Real>(params: &ComPoissonParams<T>) -> T {
    let two = T::lit(2.0);
    let (mu, nu) = (params.mu(), params.nu());
    two * nu / (two * mu * nu + T::one() + nu)
}

pub fn build_envelope<T: Real>(params: &ComPoissonParams<T>) -> Envelope<T> {
    let (mu, nu) = (params.mu(), params.nu());
    if nu >= T::one() {
        let mode = mu.floor().to_u64().unwrap_or(u64::MAX);
        let ln_q_mode = if mode == 0 {
            T::zero()
        } else {
            T::lit(mode as f64) * mu.ln() - T::ln_factorial(mode)
        };
        Envelope {
            kind: EnvelopeKind::Poisson,
            log_b: (nu - T::one()) * ln_q_mode,
        }
    } else {
        let p = geometric_p(params);
        let ln_1mp = (-p).ln_1p();
        // mu / (1-p)^(1/nu), in log space
        let lambda = (mu.ln() - ln_1mp / nu).exp().floor();
        let lambda = lambda.to_u64().unwrap_or(u64::MAX);
        let log_b = log_q(lambda, params) - T::lit(lambda as f64) * ln_1mp - p.ln();
        Envelope {
            kind: EnvelopeKind::Geometric { p, lambda },
            log_b,
        }
    }
}

/// `ln alpha(y*) = ln q(y*) - ln B - ln q_g(y*)`, capped at 0.
pub fn log_accept_prob<T: Real>(y_star: u64, params: &ComPoissonParams<T>, env: &Envelope<T>) -> T {
    let la = log_q(y_star, params) - env.log_b - env.log_qg(y_star, params);
    la.min(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleReport {
    pub value: u64,
    /// Envelope proposals used, including the accepted one.
    pub attempts: u64,
}

/// One exact COM-Poisson(`mu`, `nu`) draw.
pub fn draw<T: Real, R: Rng + ?Sized>(
    params: &ComPoissonParams<T>,
    rng: &mut R,
) -> Result<SampleReport, SamplerError> {
    let env = build_envelope(params);
    draw_with(params, &env, rng)
}

/// [`draw`] with an envelope already built from `params`.
pub fn draw_with<T: Real, R: Rng + ?Sized>(
    params: &ComPoissonParams<T>,
    env: &Envelope<T>,
    rng: &mut R,
) -> Result<SampleReport, SamplerError> {
    let poisson = match env.kind {
        EnvelopeKind::Poisson => Some(PoissonDraw::new(params.mu().to_f64().unwrap_or(f64::NAN))),
        EnvelopeKind::Geometric { .. } => None,
    };
    for attempts in 1..=MAX_ATTEMPTS {
        let y_star = match (&poisson, env.kind) {
            (Some(pd), _) => pd.sample(rng),
            (None, EnvelopeKind::Geometric { p, .. }) => geometric_draw(p, rng),
            (None, EnvelopeKind::Poisson) => unreachable!(),
        };
        let la = log_accept_prob(y_star, params, env);
        if la >= T::zero() || T::lit(open_uniform(rng).ln()) <= la {
            return Ok(SampleReport {
                value: y_star,
                attempts,
            });
        }
    }
    Err(SamplerError::AttemptCap {
        mu: params.mu().to_f64().unwrap_or(f64::NAN),
        nu: params.nu().to_f64().unwrap_or(f64::NAN),
    })
}

/// Uniform on `(0, 1]`.
#[inline]
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Geometric on `{0, 1, ...}` with mass `(1-p)^y p`, by inversion.
pub fn geometric_draw<T: Real, R: Rng + ?Sized>(p: T, rng: &mut R) -> u64 {
    let p = p.to_f64().unwrap_or(f64::NAN);
    assert!(p > 0.0 && p <= 1.0, "geometric p must be in (0, 1], got {p}");
    if p == 1.0 {
        return 0;
    }
    let y = (open_uniform(rng).ln() / (-p).ln_1p()).floor();
    if y >= u64::MAX as f64 {
        u64::MAX
    } else {
        y as u64
    }
}

/// Poisson(`mu`) draw: inversion below [`INVERSION_LIMIT`], `rand_distr` above.
pub fn poisson_draw<T: Real, R: Rng + ?Sized>(mu: T, rng: &mut R) -> u64 {
    PoissonDraw::new(mu.to_f64().unwrap_or(f64::NAN)).sample(rng)
}

const INVERSION_LIMIT: f64 = 12.0;

enum PoissonDraw {
    Inversion { mu: f64, p0: f64 },
    Ptrs(Poisson<f64>),
}

impl PoissonDraw {
    fn new(mu: f64) -> Self {
        assert!(mu > 0.0 && mu.is_finite(), "poisson mean must be finite and > 0, got {mu}");
        if mu < INVERSION_LIMIT {
            PoissonDraw::Inversion { mu, p0: (-mu).exp() }
        } else {
            PoissonDraw::Ptrs(Poisson::new(mu).expect("valid poisson mean"))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            PoissonDraw::Inversion { mu, p0 } => {
                let u = rng.random::<f64>();
                let (mut k, mut p, mut cdf) = (0u64, *p0, *p0);
                while u >= cdf {
                    k += 1;
                    p *= mu / k as f64;
                    let next = cdf + p;
                    if next == cdf {
                        // cdf saturated below u by rounding; u is in the far tail
                        break;
                    }
                    cdf = next;
                }
                k
            }
            PoissonDraw::Ptrs(d) => {
                let v: f64 = d.sample(rng);
                v as u64
            }
        }
    }
}
