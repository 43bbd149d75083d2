//! Single-chain summaries: moments, quantiles, autocorrelation and effective sample size.

use serde::Serialize;
use thiserror::Error;

use crate::mcmc::ChainResult;
use crate::real::Real;

pub const DEFAULT_MAX_LAG: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosticsError {
    #[error("series is constant; autocorrelation is undefined")]
    ConstantSeries,
    #[error("series of length {len} is too short for lag {max_lag}")]
    TooShort { len: usize, max_lag: usize },
}

/// Centered copy of a series and its lag-0 sum of squares.
fn center<T: Real>(series: &[T]) -> Result<(Vec<T>, T), DiagnosticsError> {
    let n = series.len();
    // shifting by the first element makes a constant series centre to exact zeros
    let base = series[0];
    let mean = base + series.iter().map(|&x| x - base).sum::<T>() / T::lit(n as f64);
    let centered: Vec<T> = series.iter().map(|&x| x - mean).collect();
    let c0: T = centered.iter().map(|&d| d * d).sum();
    if !(c0 > T::zero()) {
        return Err(DiagnosticsError::ConstantSeries);
    }
    Ok((centered, c0))
}

fn lag_ratio<T: Real>(centered: &[T], c0: T, k: usize) -> T {
    if k == 0 {
        return T::one();
    }
    let n = centered.len();
    let ck: T = centered[..n - k]
        .iter()
        .zip(&centered[k..])
        .map(|(&a, &b)| a * b)
        .sum();
    ck / c0
}

/// Sample autocorrelation for lags `0..=max_lag` with denominator `n` at every lag.
pub fn acf<T: Real>(series: &[T], max_lag: usize) -> Result<Vec<T>, DiagnosticsError> {
    let n = series.len();
    if n <= max_lag {
        return Err(DiagnosticsError::TooShort { len: n, max_lag });
    }
    let (centered, c0) = center(series)?;
    Ok((0..=max_lag).map(|k| lag_ratio(&centered, c0, k)).collect())
}

/// Effective sample size `n / (1 + 2 sum rho_k)` with the sum truncated by the
/// initial positive sequence: lags are taken in pairs `(rho_{2m}, rho_{2m+1})`
/// from `m = 0` (with `rho_0 = 1`) and summation stops at the first pair with a
/// non-positive sum. The result is capped to `[1, n]`.
pub fn ess<T: Real>(series: &[T]) -> Result<T, DiagnosticsError> {
    let n = series.len();
    if n < 2 {
        return Err(DiagnosticsError::TooShort { len: n, max_lag: 1 });
    }
    let (centered, c0) = center(series)?;
    let rho = |k| lag_ratio(&centered, c0, k);
    // tau = -1 + 2 sum_{m} (rho_{2m} + rho_{2m+1}) = 1 + 2 sum_{k>=1} rho_k
    let mut pair_sum = T::zero();
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = rho(2 * m) + rho(2 * m + 1);
        if !(pair > T::zero()) {
            break;
        }
        pair_sum = pair_sum + pair;
        m += 1;
    }
    let tau = T::lit(2.0) * pair_sum - T::one();
    let nf = T::lit(n as f64);
    let est = if tau > T::zero() { nf / tau } else { nf };
    Ok(est.max(T::one()).min(nf))
}

/// Linear interpolation between order statistics (`h = (n - 1) p`).
pub fn quantile_sorted<T: Real>(sorted: &[T], prob: T) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = T::lit((sorted.len() - 1) as f64) * prob;
    let lo = h.floor().to_usize().unwrap_or(0).min(sorted.len() - 1);
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - T::lit(lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSummary<T = f64> {
    pub name: String,
    pub mean: T,
    pub sd: T,
    pub q025: T,
    pub q50: T,
    pub q975: T,
    /// `None` when the draws are constant.
    pub ess: Option<T>,
    /// Lags `0..=K`; `None` when the draws are constant.
    pub acf: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary<T = f64> {
    pub n_samples: usize,
    pub accept_rate: T,
    pub coefficients: Vec<CoefficientSummary<T>>,
}

/// Per-coefficient summary of one draw sequence.
pub fn summarize_draws<T: Real>(name: &str, draws: &[T], max_lag: usize) -> CoefficientSummary<T> {
    assert!(!draws.is_empty(), "summary of an empty chain");
    let n = draws.len();
    // shifted by the first draw so a constant chain has exactly zero spread
    let base = draws[0];
    let mean = base + draws.iter().map(|&x| x - base).sum::<T>() / T::lit(n as f64);
    let sd = if n > 1 {
        let ss: T = draws.iter().map(|&x| (x - mean) * (x - mean)).sum();
        (ss / T::lit((n - 1) as f64)).sqrt()
    } else {
        T::zero()
    };
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    let lag = max_lag.min(n.saturating_sub(1));
    CoefficientSummary {
        name: name.to_string(),
        mean,
        sd,
        q025: quantile_sorted(&sorted, T::lit(0.025)),
        q50: quantile_sorted(&sorted, T::lit(0.5)),
        q975: quantile_sorted(&sorted, T::lit(0.975)),
        ess: ess(draws).ok(),
        acf: acf(draws, lag).ok(),
    }
}

/// Coefficient draws as columns, in the flat layout order.
pub fn coefficient_columns<T: Real>(chain: &ChainResult<T>) -> Vec<Vec<T>> {
    let dim = chain.samples.first().map_or(0, |s| s.coeffs.to_flat().len());
    let mut cols = vec![Vec::with_capacity(chain.samples.len()); dim];
    for s in &chain.samples {
        for (col, v) in cols.iter_mut().zip(s.coeffs.to_flat()) {
            col.push(v);
        }
    }
    cols
}

/// Summaries for every coefficient; `names` follows the flat coefficient layout.
pub fn summarize<T: Real>(chain: &ChainResult<T>, names: &[String], max_lag: usize) -> ChainSummary<T> {
    let cols = coefficient_columns(chain);
    ChainSummary {
        n_samples: chain.samples.len(),
        accept_rate: chain.accept_rate,
        coefficients: cols
            .iter()
            .zip(names)
            .map(|(col, name)| summarize_draws(name, col, max_lag))
            .collect(),
    }
}
