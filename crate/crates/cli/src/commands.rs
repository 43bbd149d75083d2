use std::io::Write;
use std::path::{Path, PathBuf};

use compois_garma::compois::{log_q, log_z_truncated};
use compois_garma::diagnostics::{acf, summarize, summarize_draws, ChainSummary, CoefficientSummary};
use compois_garma::garma::simulate_series;
use compois_garma::mcmc::{run_chain, run_chains, ChainResult};
use compois_garma::prediction::{fitted_mu_path, predictive_pmf};
use compois_garma::{ComPoissonParams, GarmaCoefficients, Kernel, ModelOrder, Stream, TruncationPolicy};
use rand::SeedableRng;
use serde::Serialize;

use crate::cli::{DiagnoseArgs, FitArgs, KernelChoice, Overrides, PmfArgs, PredictArgs, SimulateArgs};
use crate::config::{sha256_hex, RunConfig};
use crate::data::{load_csv, series_body, SeriesStats};
use crate::error::CliError;
use crate::output::{ensure_dir, real, write_file, write_json, Provenance, Table};
use crate::samples;

/// Config file (if any) with flag overrides applied, validated.
pub fn resolve_config(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &o.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = o.seed {
        cfg.mcmc.seed = Some(v);
    }
    if let Some(v) = o.p {
        cfg.model.p = v;
    }
    if let Some(v) = o.q {
        cfg.model.q = v;
    }
    if let Some(v) = o.c {
        cfg.model.c = v;
    }
    if let Some(v) = o.iterations {
        cfg.mcmc.iterations = v;
    }
    if let Some(v) = o.burn_in {
        cfg.mcmc.burn_in = v;
    }
    if let Some(v) = o.thin {
        cfg.mcmc.thin = v;
    }
    if let Some(k) = o.kernel {
        let same = matches!(
            (k, &cfg.kernel),
            (KernelChoice::Exchange, Kernel::Exchange { .. }) | (KernelChoice::Direct, Kernel::Direct { .. })
        );
        if !same {
            cfg.kernel = match k {
                KernelChoice::Exchange => Kernel::exchange(),
                KernelChoice::Direct => Kernel::direct(),
            };
        }
    }
    if let Some(v) = o.chains {
        cfg.chains = v;
    }
    if let Some(v) = o.draws {
        cfg.prediction.draws_per_sample = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Fills in a generated seed when none was given. Returns `(seed, generated)`.
fn resolve_seed(cfg: &mut RunConfig) -> (u64, bool) {
    match cfg.mcmc.seed {
        Some(s) => (s, false),
        None => {
            let s = rand::random::<u64>();
            cfg.mcmc.seed = Some(s);
            (s, true)
        }
    }
}

fn sample_file_names(chains: usize) -> Vec<String> {
    if chains == 1 {
        vec!["samples.csv".to_string()]
    } else {
        (1..=chains).map(|k| format!("samples_{k}.csv")).collect()
    }
}

#[derive(Debug, Serialize)]
struct ChainReport<'a> {
    chain: usize,
    seed: u64,
    samples_file: &'a str,
    step_sizes_final: &'a [f64],
    clamp_hits: usize,
    sampler_cap_rejections: usize,
    truncation_rejections: usize,
    summary: &'a ChainSummary<f64>,
}

#[derive(Debug, Serialize)]
struct FitSummary<'a> {
    provenance: &'a Provenance,
    data: &'a SeriesStats,
    config: &'a RunConfig,
    chains: Vec<ChainReport<'a>>,
}

fn print_coefficient(out: &mut dyn Write, c: &CoefficientSummary<f64>) -> std::io::Result<()> {
    let ess = c.ess.map_or_else(|| "-".to_string(), |e| format!("{e:.0}"));
    writeln!(
        out,
        "  {:<10} mean {:>9.4}  sd {:>8.4}  95% [{:>8.4}, {:>8.4}]  ess {ess}",
        c.name, c.mean, c.sd, c.q025, c.q975
    )
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::output("<stdout>", e)
}

pub fn fit(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = resolve_config(&args.overrides)?;
    let (seed, generated) = resolve_seed(&mut cfg);
    let series = load_csv(&args.data)?;
    let stats = SeriesStats::of(&series);
    let order = cfg.model.order();
    let mcmc = cfg.mcmc.with_seed(seed);

    let chains: Vec<ChainResult> = if cfg.chains == 1 {
        vec![run_chain(&series, &order, &cfg.prior, &mcmc, &cfg.kernel)?]
    } else {
        run_chains(&series, &order, &cfg.prior, &mcmc, &cfg.kernel, cfg.chains)?
    };

    let provenance = Provenance::new(Some(seed), generated, cfg.hash());
    let names = order.coefficient_names();
    let files = sample_file_names(cfg.chains);
    let summaries: Vec<ChainSummary> = chains
        .iter()
        .map(|c| summarize(c, &names, cfg.diagnostics.max_lag))
        .collect();

    ensure_dir(&cfg.output_dir)?;
    let mut written = Vec::new();
    for (chain, file) in chains.iter().zip(&files) {
        let text = samples::render(&provenance, &names, &chain.samples);
        written.push(write_file(cfg.output_dir.join(file), &text)?);
    }
    let summary = FitSummary {
        provenance: &provenance,
        data: &stats,
        config: &cfg,
        chains: chains
            .iter()
            .zip(&summaries)
            .zip(&files)
            .enumerate()
            .map(|(k, ((c, s), f))| ChainReport {
                chain: k,
                seed: seed.wrapping_add(k as u64),
                samples_file: f,
                step_sizes_final: &c.step_sizes_final,
                clamp_hits: c.clamp_hits,
                sampler_cap_rejections: c.sampler_cap_rejections,
                truncation_rejections: c.truncation_rejections,
                summary: s,
            })
            .collect(),
    };
    written.push(write_json(cfg.output_dir.join("summary.json"), &summary)?);

    (|| -> std::io::Result<()> {
        writeln!(
            out,
            "data {}: n={} mean={:.4} variance={:.4}",
            stats.path, stats.n, stats.mean, stats.variance
        )?;
        for (k, s) in summaries.iter().enumerate() {
            writeln!(
                out,
                "chain {k}: seed={} retained={} accept_rate={:.3}",
                seed.wrapping_add(k as u64),
                s.n_samples,
                s.accept_rate
            )?;
            for c in &s.coefficients {
                print_coefficient(out, c)?;
            }
        }
        for w in &written {
            writeln!(out, "wrote {}", w.display())?;
        }
        Ok(())
    })()
    .map_err(stdout_err)
}

pub fn predict(args: &PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = resolve_config(&args.overrides)?;
    let (seed, generated) = resolve_seed(&mut cfg);
    let series = load_csv(&args.data)?;
    let order = cfg.model.order();
    let paths: Vec<PathBuf> = if args.samples.is_empty() {
        sample_file_names(cfg.chains)
            .iter()
            .map(|f| cfg.output_dir.join(f))
            .collect()
    } else {
        args.samples.clone()
    };
    let mut pooled = Vec::new();
    for p in &paths {
        let draws = samples::load(p)?;
        pooled.extend(draws.to_samples(&p.display().to_string(), &series, &order, &cfg.prior)?);
    }

    let mut rng = Stream::seed_from_u64(seed);
    rng.set_stream(1);
    let pmf = predictive_pmf(&series, &pooled, &order, cfg.prediction.draws_per_sample, &mut rng)?;
    let path = fitted_mu_path(&series, &pooled, &order)?;

    let provenance = Provenance::new(Some(seed), generated, cfg.hash());
    ensure_dir(&cfg.output_dir)?;
    let mut t = Table::new(&provenance, &["k", "count", "total", "probability"]);
    for (k, &count) in pmf.counts().iter().enumerate() {
        t.row([
            k.to_string(),
            count.to_string(),
            pmf.total().to_string(),
            real(pmf.prob_real(k as u64)),
        ]);
    }
    let a = write_file(cfg.output_dir.join("predictive.csv"), &t.into_string())?;
    let mut t = Table::new(&provenance, &["t", "y", "mean", "lower", "upper"]);
    for pt in &path {
        t.row([pt.t.to_string(), pt.y.to_string(), real(pt.mean), real(pt.lower), real(pt.upper)]);
    }
    let b = write_file(cfg.output_dir.join("mu_path.csv"), &t.into_string())?;

    (|| -> std::io::Result<()> {
        writeln!(
            out,
            "predictive: N={} L={} support 0..={}",
            pmf.n_posterior,
            pmf.draws_per_sample,
            pmf.max_value()
        )?;
        writeln!(out, "wrote {}", a.display())?;
        writeln!(out, "wrote {}", b.display())
    })()
    .map_err(stdout_err)
}

#[derive(Debug, Serialize)]
struct SimulateSpec<'a> {
    phi: &'a [f64],
    theta: &'a [f64],
    delta: &'a [f64],
    c: f64,
    n: usize,
    presample: &'a [u64],
    seed: u64,
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.delta.len() != args.phi.len() {
        return Err(CliError::Usage(format!(
            "--delta has {} values, --phi has {}; the dispersion order follows p",
            args.delta.len(),
            args.phi.len()
        )));
    }
    let order = ModelOrder::new(args.phi.len(), args.theta.len(), args.c)?;
    let coeffs = GarmaCoefficients::new(&order, args.phi.clone(), args.theta.clone(), args.delta.clone())?;
    let presample = if args.presample.is_empty() {
        vec![1; order.r()]
    } else {
        args.presample.clone()
    };
    let (seed, generated) = match args.seed {
        Some(s) => (s, false),
        None => (rand::random::<u64>(), true),
    };
    let spec = SimulateSpec {
        phi: &args.phi,
        theta: &args.theta,
        delta: &args.delta,
        c: args.c,
        n: args.n,
        presample: &presample,
        seed,
    };
    let hash = sha256_hex(&serde_json::to_vec(&spec).expect("spec serializes"));
    let mut rng = Stream::seed_from_u64(seed);
    let series = simulate_series(&coeffs, &order, args.n, &presample, &mut rng)?;
    let provenance = Provenance::new(Some(seed), generated, hash);
    let text = provenance.comment() + &series_body(&series);
    if let Some(dir) = args.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let path = write_file(&args.output, &text)?;
    writeln!(
        out,
        "simulated n={} mean={:.4} variance={:.4} seed={seed}\nwrote {}",
        series.len(),
        series.mean(),
        series.variance(),
        path.display()
    )
    .map_err(stdout_err)
}

pub fn pmf(args: &PmfArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = ComPoissonParams::new(args.mu, args.nu).map_err(|e| CliError::Usage(e.to_string()))?;
    let policy = TruncationPolicy {
        rel_tol: args.rel_tol,
        max_terms: args.max_terms,
    };
    policy.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let t = log_z_truncated(&params, &policy).map_err(|e| CliError::Numerical(e.to_string()))?;
    let hash = sha256_hex(
        &serde_json::to_vec(&(args.mu, args.nu, args.rel_tol, args.max_terms)).expect("serializes"),
    );
    let provenance = Provenance::new(None, false, hash);
    let mut table = Table::new(&provenance, &["y", "pmf", "cdf"]);
    let mut cdf = 0.0;
    for y in 0..=t.last {
        let p = (log_q(y, &params) - t.log_z).exp();
        cdf += p;
        table.row([y.to_string(), real(p), real(cdf)]);
    }
    let text = table.into_string();
    let (first, rest) = text.split_once('\n').expect("comment line");
    write!(
        out,
        "{first}\n# mu={} nu={} log_z={} terms={}\n{rest}",
        real(args.mu),
        real(args.nu),
        real(t.log_z),
        t.last + 1
    )
    .map_err(stdout_err)
}

pub fn diagnose(args: &DiagnoseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let draws = samples::load(&args.samples)?;
    let n = draws.rows.len();
    if n <= args.max_lag {
        return Err(CliError::Usage(format!(
            "{} has {n} draws; --max-lag must be below that",
            args.samples.display()
        )));
    }
    let dir: PathBuf = match &args.out {
        Some(d) => d.clone(),
        None => args
            .samples
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default(),
    };
    let input = std::fs::read(&args.samples).map_err(|source| crate::data::DataError::Io {
        path: args.samples.display().to_string(),
        source,
    })?;
    let hash = sha256_hex(
        &serde_json::to_vec(&(sha256_hex(&input), args.max_lag)).expect("serializes"),
    );
    let provenance = Provenance::new(None, false, hash);

    let columns: Vec<Vec<f64>> = (0..draws.names.len()).map(|k| draws.column(k)).collect();
    let acfs: Vec<Option<Vec<f64>>> = columns.iter().map(|c| acf(c, args.max_lag).ok()).collect();
    let mut header = vec!["lag"];
    header.extend(draws.names.iter().map(String::as_str));
    let mut t = Table::new(&provenance, &header);
    for lag in 0..=args.max_lag {
        t.row(
            std::iter::once(lag.to_string())
                .chain(acfs.iter().map(|a| a.as_ref().map_or_else(|| "NaN".to_string(), |v| real(v[lag])))),
        );
    }
    let mut header = vec!["iteration"];
    header.extend(draws.names.iter().map(String::as_str));
    let mut tr = Table::new(&provenance, &header);
    for (it, row) in draws.iterations.iter().zip(&draws.rows) {
        tr.row(std::iter::once(it.to_string()).chain(row.iter().map(|&v| real(v))));
    }
    if !dir.as_os_str().is_empty() {
        ensure_dir(&dir)?;
    }
    let a = write_file(dir.join("acf.csv"), &t.into_string())?;
    let b = write_file(dir.join("trace.csv"), &tr.into_string())?;

    (|| -> std::io::Result<()> {
        writeln!(out, "{n} draws")?;
        for (name, col) in draws.names.iter().zip(&columns) {
            print_coefficient(out, &summarize_draws(name, col, args.max_lag))?;
        }
        writeln!(out, "wrote {}", a.display())?;
        writeln!(out, "wrote {}", b.display())
    })()
    .map_err(stdout_err)
}
