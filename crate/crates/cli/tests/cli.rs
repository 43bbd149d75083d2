use std::fs;
use std::path::Path;

use compois_cli::{load_csv, run};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cmd(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("cmpgarma").chain(args.iter().copied()), &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut args = vec!["simulate", "--output", p(&path)];
    args.extend_from_slice(extra);
    let o = cmd(&args);
    assert_eq!(o.code, 0, "{}", o.stderr);
    path
}

#[test]
fn simulate_round_trips_through_load_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(
        dir.path(),
        "y.csv",
        &["--phi", "0.5", "--theta", "0.2", "--delta=-0.3", "--n", "200", "--seed", "9"],
    );
    let loaded = load_csv(&path).unwrap();

    use compois_garma::garma::simulate_series;
    use compois_garma::{GarmaCoefficients, ModelOrder, Stream};
    use rand::SeedableRng;
    let order = ModelOrder::with_lags(1, 1).unwrap();
    let coeffs = GarmaCoefficients::new(&order, vec![0.5], vec![0.2], vec![-0.3]).unwrap();
    let direct = simulate_series(&coeffs, &order, 200, &[1], &mut Stream::seed_from_u64(9)).unwrap();
    assert_eq!(loaded.values(), direct.values());
}

#[test]
fn zero_coefficients_simulate_poisson_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(
        dir.path(),
        "y.csv",
        &["--phi", "0", "--theta", "0", "--delta", "0", "--n", "1000", "--seed", "11"],
    );
    let s = load_csv(&path).unwrap();
    assert_eq!(s.len(), 1000);
    assert!((s.mean() - 1.0).abs() < 3.0 / (1000f64).sqrt(), "mean {}", s.mean());
}

#[test]
fn pmf_matches_poisson() {
    let o = cmd(&["pmf", "--mu", "2", "--nu", "1"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let mut lines = o.stdout.lines();
    assert!(lines.next().unwrap().starts_with("# cmpgarma "));
    assert!(lines.next().unwrap().starts_with("# mu="));
    assert_eq!(lines.next().unwrap(), "y,pmf,cdf");
    let mut ln_fact = 0.0f64;
    let mut rows = 0;
    for (y, line) in lines.enumerate() {
        if y > 0 {
            ln_fact += (y as f64).ln();
        }
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), y);
        let got: f64 = f[1].parse().unwrap();
        let want = (y as f64 * 2f64.ln() - 2.0 - ln_fact).exp();
        assert!((got - want).abs() < 1e-10, "y={y}: {got} vs {want}");
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn pmf_non_convergence_is_numerical() {
    let o = cmd(&["pmf", "--mu", "50", "--nu", "1", "--max-terms", "10"]);
    assert_eq!(o.code, 3, "{}", o.stderr);
}

#[test]
fn bad_data_reports_line_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "count\n3\nx\n").unwrap();
    let o = cmd(&["fit", "--data", p(&data), "--seed", "1", "--iterations", "20", "--burn-in", "10"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains(":3:"), "{}", o.stderr);

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "count\n").unwrap();
    let o = cmd(&["fit", "--data", p(&empty), "--seed", "1"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("no data values"), "{}", o.stderr);

    let o = cmd(&["fit", "--data", p(&dir.path().join("missing.csv")), "--seed", "1"]);
    assert_eq!(o.code, 2);
}

#[test]
fn config_errors_name_fields() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "y.csv", &["--phi", "0.3", "--delta", "0", "--n", "30", "--seed", "2"]);
    let cfg = dir.path().join("c.json");

    fs::write(&cfg, r#"{"mcmc": {"iterations": "many"}}"#).unwrap();
    let o = cmd(&["fit", "--data", p(&data), "--config", p(&cfg)]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("mcmc.iterations"), "{}", o.stderr);

    fs::write(&cfg, r#"{"priors": {}}"#).unwrap();
    let o = cmd(&["fit", "--data", p(&data), "--config", p(&cfg)]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("priors"), "{}", o.stderr);

    fs::write(&cfg, r#"{"mcmc": {"iterations": 100, "burn_in": 100}}"#).unwrap();
    let o = cmd(&["fit", "--data", p(&data), "--config", p(&cfg)]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("mcmc.burn_in"), "{}", o.stderr);

    let o = cmd(&["fit", "--bogus"]);
    assert_eq!(o.code, 1);
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn fit_predict_diagnose_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(
        dir.path(),
        "y.csv",
        &["--phi", "0.5", "--theta", "0.2", "--delta", "0.3", "--n", "120", "--seed", "4"],
    );
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"mcmc": {"iterations": 3000, "burn_in": 1000, "thin": 4, "seed": 17},
            "prediction": {"draws_per_sample": 20}}"#,
    )
    .unwrap();
    let out = dir.path().join("fit");
    let run_all = |out: &Path| {
        for args in [
            vec!["fit", "--data", p(&data), "--config", p(&cfg), "--out", p(out)],
            vec!["predict", "--data", p(&data), "--config", p(&cfg), "--out", p(out)],
            vec!["diagnose", "--samples", p(&out.join("samples.csv"))],
        ] {
            let o = cmd(&args);
            assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
        }
    };
    run_all(&out);

    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    let mut lines = samples.lines();
    assert!(lines.next().unwrap().contains("seed=17"));
    assert_eq!(lines.next().unwrap(), "iteration,phi_1,theta_1,delta_1");
    assert_eq!(lines.count(), 500);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["provenance"]["seed"], 17);
    assert_eq!(summary["chains"][0]["summary"]["n_samples"], 500);
    assert_eq!(summary["config"]["mcmc"]["iterations"], 3000);

    let pred = fs::read_to_string(out.join("predictive.csv")).unwrap();
    let rows: Vec<Vec<u64>> = pred
        .lines()
        .skip(2)
        .map(|l| l.split(',').take(3).map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.iter().map(|r| r[1]).sum::<u64>(), 500 * 20);
    assert!(rows.iter().all(|r| r[2] == 500 * 20));

    let mu = fs::read_to_string(out.join("mu_path.csv")).unwrap();
    assert_eq!(mu.lines().nth(1).unwrap(), "t,y,mean,lower,upper");
    assert_eq!(mu.lines().count(), 2 + 119);

    let acf = fs::read_to_string(out.join("acf.csv")).unwrap();
    assert_eq!(acf.lines().count(), 2 + 41);
    assert_eq!(fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), 2 + 500);

    for f in ["samples.csv", "predictive.csv", "mu_path.csv", "acf.csv", "trace.csv"] {
        assert!(first_line(&out.join(f)).starts_with("# cmpgarma "), "{f}");
    }

    // reruns into another directory are byte-identical
    let again = dir.path().join("again");
    run_all(&again);
    for f in ["samples.csv", "summary.json", "predictive.csv", "mu_path.csv", "acf.csv", "trace.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn generated_seed_is_recorded_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "y.csv", &["--phi", "0.4", "--delta", "0", "--n", "40", "--seed", "3"]);
    let a = dir.path().join("a");
    let o = cmd(&["fit", "--data", p(&data), "-p", "1", "-q", "0", "--iterations", "300", "--burn-in", "100", "--thin", "1", "--out", p(&a)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["provenance"]["seed_generated"], true);
    let seed = summary["provenance"]["seed"].as_u64().unwrap().to_string();

    let b = dir.path().join("b");
    let o = cmd(&["fit", "--data", p(&data), "-p", "1", "-q", "0", "--iterations", "300", "--burn-in", "100", "--thin", "1", "--out", p(&b), "--seed", &seed]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    // same draws; only the seed_generated flag differs
    assert_eq!(fs::read(a.join("samples.csv")).unwrap(), fs::read(b.join("samples.csv")).unwrap());
}

#[test]
fn parallel_chains_write_separate_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "y.csv", &["--phi", "0.4", "--delta", "0.1", "--n", "40", "--seed", "3"]);
    let out = dir.path().join("fit");
    let common = ["--data", p(&data), "--seed", "5", "--iterations", "400", "--burn-in", "200", "--thin", "2"];
    let mut args = vec!["fit", "--chains", "3", "--out", p(&out)];
    args.extend_from_slice(&common);
    let o = cmd(&args);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let files: Vec<String> = (1..=3)
        .map(|k| fs::read_to_string(out.join(format!("samples_{k}.csv"))).unwrap())
        .collect();
    assert_ne!(files[0], files[1]);

    // chain 2 equals a single-chain run at seed 5 + 1, apart from the header comment
    let single = dir.path().join("single");
    let o = cmd(&["fit", "--data", p(&data), "--seed", "6", "--iterations", "400", "--burn-in", "200", "--thin", "2", "--out", p(&single)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let body = |s: &str| s.split_once('\n').unwrap().1.to_string();
    assert_eq!(body(&files[1]), body(&fs::read_to_string(single.join("samples.csv")).unwrap()));

    let o = cmd(&["predict", "--data", p(&data), "--seed", "5", "--chains", "3", "--out", p(&out), "--draws", "10"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("N=300"), "{}", o.stdout);
}

#[test]
fn shipped_example_config_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/example-config.json");
    let config = compois_cli::RunConfig::load(&path).unwrap();
    config.validate().unwrap();
    assert_eq!(config.mcmc.seed, Some(1983));
}
