use compois_garma::diagnostics::{ess, summarize};
use compois_garma::garma::simulate_series;
use compois_garma::mcmc::{run_chain, run_chains};
use compois_garma::prediction::predictive_pmf;
use compois_garma::real::ln_factorial_f64;
use compois_garma::*;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Posterior mean and its Monte Carlo standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let (m, sd) = mean_sd(xs);
    (m, sd / ess(xs).unwrap().sqrt())
}

#[test]
fn exchange_and_direct_intervals_overlap() {
    let order = ModelOrder::with_lags(1, 1).unwrap();
    let truth = GarmaCoefficients::new(&order, vec![0.5], vec![0.2], vec![0.3]).unwrap();
    let y = simulate_series(&truth, &order, 100, &[1], &mut Stream::seed_from_u64(21)).unwrap();
    let cfg = McmcConfig {
        iterations: 10_000,
        burn_in: 3000,
        thin: 2,
        seed: 4,
        ..Default::default()
    };
    let names = order.coefficient_names();
    let prior = PriorSpec::default();
    let ex = summarize(&run_chain(&y, &order, &prior, &cfg, &Kernel::exchange()).unwrap(), &names, 40);
    let di = summarize(&run_chain(&y, &order, &prior, &cfg, &Kernel::direct()).unwrap(), &names, 40);
    for (a, b) in ex.coefficients.iter().zip(&di.coefficients) {
        assert!(a.q025 <= b.q975 && b.q025 <= a.q975, "{}: {a:?} vs {b:?}", a.name);
    }
}

fn poisson_garma_loglik(y: &[u64], phi: f64, theta: f64) -> f64 {
    let c = 0.1f64;
    let mut prev_mu = (y[0] as f64).max(c);
    let mut total = 0.0;
    for t in 1..y.len() {
        let ys = (y[t - 1] as f64).max(c);
        let mu = (phi * ys.ln() + theta * (ys.ln() - prev_mu.ln())).exp();
        total += y[t] as f64 * mu.ln() - mu - ln_factorial_f64(y[t]);
        prev_mu = mu;
    }
    total
}

/// Plain random-walk Metropolis on the Poisson-GARMA(1,1) posterior with
/// N(0, 10) priors, fixed proposal scale.
fn poisson_mh_oracle(y: &[u64], iterations: usize, burn_in: usize, scale: f64, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = Stream::seed_from_u64(seed);
    let log_post = |p: [f64; 2]| poisson_garma_loglik(y, p[0], p[1]) - (p[0] * p[0] + p[1] * p[1]) / 20.0;
    let mut x = [0.0, 0.0];
    let mut lp = log_post(x);
    let mut out = Vec::new();
    for i in 0..iterations {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let prop = [x[0] + scale * z0, x[1] + scale * z1];
        let lp_prop = log_post(prop);
        if rng.random::<f64>().ln() < lp_prop - lp {
            x = prop;
            lp = lp_prop;
        }
        if i >= burn_in {
            out.push(x);
        }
    }
    out
}

#[test]
fn poisson_case_matches_poisson_garma_oracle() {
    let order = ModelOrder::with_lags(1, 1).unwrap();
    let truth = GarmaCoefficients::new(&order, vec![0.6], vec![0.2], vec![0.0]).unwrap();
    let y = simulate_series(&truth, &order, 200, &[2], &mut Stream::seed_from_u64(33)).unwrap();
    let cfg = McmcConfig {
        iterations: 20_000,
        burn_in: 5000,
        thin: 1,
        seed: 8,
        initial_step_sizes: vec![0.1, 0.1, 0.0],
        ..Default::default()
    };
    let res = run_chain(&y, &order, &PriorSpec::default(), &cfg, &Kernel::exchange()).unwrap();
    assert!(res.samples.iter().all(|s| s.coeffs.delta[0] == 0.0));
    let oracle = poisson_mh_oracle(&y, 40_000, 5000, 0.12, 9);
    for k in 0..2 {
        let ours: Vec<f64> = res.samples.iter().map(|s| s.coeffs.to_flat()[k]).collect();
        let theirs: Vec<f64> = oracle.iter().map(|p| p[k]).collect();
        let (m1, se1) = mean_se(&ours);
        let (m2, se2) = mean_se(&theirs);
        let z = (m1 - m2) / (se1 * se1 + se2 * se2).sqrt();
        assert!(z.abs() < 3.0, "coefficient {k}: {m1} vs {m2} (z={z})");
    }
}

#[test]
fn parallel_chains_are_seeded_independently() {
    let order = ModelOrder::with_lags(1, 0).unwrap();
    let y = [1u64, 0, 2, 3, 1, 0, 0, 1, 4, 2];
    let cfg = McmcConfig {
        iterations: 400,
        burn_in: 100,
        thin: 3,
        seed: 40,
        ..Default::default()
    };
    let prior = PriorSpec::default();
    let chains = run_chains(&y, &order, &prior, &cfg, &Kernel::exchange(), 3).unwrap();
    assert_eq!(chains.len(), 3);
    for (k, chain) in chains.iter().enumerate() {
        let single = McmcConfig { seed: 40 + k as u64, ..cfg.clone() };
        assert_eq!(chain, &run_chain(&y, &order, &prior, &single, &Kernel::exchange()).unwrap());
    }
    assert_ne!(chains[0], chains[1]);
}

fn posterior_like_samples(order: &ModelOrder, y: &[u64], n: usize, seed: u64) -> Vec<PosteriorSample> {
    let mut rng = Stream::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let phi = 0.5 + 0.1 * rng.sample::<f64, _>(StandardNormal);
            let theta = 0.2 + 0.1 * rng.sample::<f64, _>(StandardNormal);
            let c = GarmaCoefficients::new(order, vec![phi], vec![theta], vec![0.0]).unwrap();
            PosteriorSample::at(c, i, y, order, &PriorSpec::default()).unwrap()
        })
        .collect()
}

fn one_step_mu(y: &[u64], phi: f64, theta: f64) -> f64 {
    let c = 0.1f64;
    let mut prev_mu = (y[0] as f64).max(c);
    for t in 1..=y.len() {
        let ys = (y[t - 1] as f64).max(c);
        prev_mu = (phi * ys.ln() + theta * (ys.ln() - prev_mu.ln())).exp();
    }
    prev_mu
}

#[test]
fn predictive_matches_poisson_mixture() {
    let order = ModelOrder::with_lags(1, 1).unwrap();
    let truth = GarmaCoefficients::new(&order, vec![0.5], vec![0.2], vec![0.0]).unwrap();
    let y = simulate_series(&truth, &order, 80, &[3], &mut Stream::seed_from_u64(70)).unwrap();
    let samples = posterior_like_samples(&order, &y, 100, 71);
    let pmf = predictive_pmf(&y, &samples, &order, 1000, &mut Stream::seed_from_u64(72)).unwrap();

    let mus: Vec<f64> = samples
        .iter()
        .map(|s| one_step_mu(&y, s.coeffs.phi[0], s.coeffs.theta[0]))
        .collect();
    let mixture = |k: u64| {
        mus.iter()
            .map(|&m| (k as f64 * m.ln() - m - ln_factorial_f64(k)).exp())
            .sum::<f64>()
            / mus.len() as f64
    };
    let upper = pmf.max_value().max(60);
    let tv = 0.5
        * (0..=upper)
            .map(|k| (pmf.prob_real::<f64>(k) - mixture(k)).abs())
            .sum::<f64>();
    assert!(tv < 0.02, "tv={tv}");
}

#[test]
fn predictive_error_shrinks_with_draws() {
    let order = ModelOrder::with_lags(1, 1).unwrap();
    let y = [2u64, 1, 0, 3, 1, 1, 2, 0, 1, 2];
    let samples = posterior_like_samples(&order, &y, 10, 80);
    let mut rng = Stream::seed_from_u64(81);
    let mut p0 = |l: usize| -> Vec<f64> {
        (0..50)
            .map(|_| predictive_pmf(&y, &samples, &order, l, &mut rng).unwrap().prob_real(0))
            .collect()
    };
    let (_, sd_l) = mean_sd(&p0(200));
    let (_, sd_2l) = mean_sd(&p0(400));
    let ratio = sd_l / sd_2l;
    assert!((ratio - 2f64.sqrt()).abs() < 0.3, "ratio={ratio}");
}
