use std::fs;
use std::io::BufWriter;
use std::path::Path;

use fuzzyjm::eval::{
    adjusted_rand_index, align_and_mse, aligned_balanced_accuracy, lambda_grid,
    lambda_stability_curve, run_benchmark, state_conditional_stats, BenchmarkSpec,
};
use fuzzyjm::io::{
    create_file, prototypes_json, read_csv, read_csv_from, read_schema, read_state_columns,
    run_pipeline, write_json, write_memberships, write_simulated, ColumnKind, ColumnSpec,
    FitMetrics, Pipeline,
};
use fuzzyjm::simulate::{sample_series, SimulationConfig};
use fuzzyjm::{fit as fit_model, Error, FitConfig, Result};
use serde_json::{json, Map, Value};

use crate::{BenchmarkArgs, EvalArgs, FitArgs, Metric, SimulateArgs, TransformArgs, TuneArgs};

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

pub fn fit(a: FitArgs) -> Result<()> {
    let columns = read_schema(&a.schema)?;
    let table = read_csv(&a.input, &columns)?;
    let cfg = FitConfig::new(a.k, a.m, a.lambda)
        .with_restarts(a.restarts)
        .with_max_outer_iter(a.max_iter)
        .with_outer_tol(a.tol)
        .with_distance(a.distance.into())
        .with_seed(a.seed);
    cfg.validate_schema(table.data.schema())?;
    let result = fit_model(&table.data, &cfg)?;

    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let file = create_file(a.out.join("memberships.csv"))?;
    write_memberships(&result.memberships, BufWriter::new(file))?;
    write_json(&prototypes_json(&result, &table.data), a.out.join("prototypes.json"))?;
    write_json(&FitMetrics::new(&result, &table.data, &cfg), a.out.join("metrics.json"))?;
    eprintln!(
        "fitted T={} P={} K={}: objective {} after {} iterations (restart {})",
        table.data.n_rows(),
        table.data.n_features(),
        a.k,
        result.objective,
        result.iterations_used,
        result.best_restart
    );
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = SimulationConfig::from_scenario(a.scenario, a.k, a.p, a.t)
        .with_rho(a.rho)
        .with_phi(a.phi)
        .with_seed(a.seed);
    if let Some(tau) = a.tau {
        cfg = cfg.with_tau(tau);
    }
    let series = sample_series(&cfg)?;
    write_simulated(&series, BufWriter::new(create_file(&a.out)?))
}

/// `min:step:max` or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("invalid grid value {s:?} in {text:?}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [min, step, max] => lambda_grid(num(min)?, num(max)?, num(step)?),
        [_] => text.split(',').map(num).collect(),
        _ => Err(usage(format!("grid {text:?} must be min:step:max or a comma list"))),
    }
}

pub fn benchmark(a: BenchmarkArgs) -> Result<()> {
    if a.out.extension().is_some_and(|e| e == "csv") {
        return Err(usage("--out names the JSON report; the CSV is written next to it"));
    }
    let spec = BenchmarkSpec::new(a.scenario, a.k, a.t, a.p, a.replicas)
        .with_grids(parse_grid(&a.lambda_grid)?, parse_grid(&a.m_grid)?)
        .with_seed(a.seed)
        .with_restarts(a.restarts)
        .with_rho(a.rho);
    let report = run_benchmark(&spec)?;
    write_json(&report, &a.out)?;
    report.write_csv(BufWriter::new(create_file(a.out.with_extension("csv"))?))?;
    eprintln!(
        "best cell: lambda {} m {} mean MSE {} (sd {}); {} fits in {:.1}s",
        report.best.lambda,
        report.best.m,
        report.best.mean_mse,
        report.best.sd_mse,
        report.runtime.fits,
        report.runtime.total_seconds
    );
    Ok(())
}

pub fn tune_lambda(a: TuneArgs) -> Result<()> {
    let columns = read_schema(&a.schema)?;
    let table = read_csv(&a.input, &columns)?;
    let cfg = FitConfig::new(a.k, a.m, a.lambda_min)
        .with_restarts(a.restarts)
        .with_distance(a.distance.into())
        .with_seed(a.seed);
    cfg.validate_schema(table.data.schema())?;
    let grid = lambda_grid(a.lambda_min, a.lambda_max, a.lambda_step)?;
    let curve = lambda_stability_curve(&table.data, &cfg, &grid)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(create_file(&a.out)?));
    w.write_record(["lambda", "next_lambda", "mse"])?;
    for p in &curve {
        w.write_record([p.lambda.to_string(), p.next_lambda.to_string(), p.mse.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&a.out, e))
}

pub fn transform(a: TransformArgs) -> Result<()> {
    let text = fs::read_to_string(&a.spec).map_err(|e| Error::io(&a.spec, e))?;
    let pipeline = Pipeline::from_json(&text)?;
    let output = run_pipeline(open(&a.input)?, &pipeline)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    output.write_csv(BufWriter::new(create_file(&a.out)?))?;
    eprintln!("{} rows written ({} leading rows dropped)", output.rows.len(), output.dropped_rows);
    Ok(())
}

/// Reads a CSV whose columns are all numeric.
fn read_numeric(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let columns: Vec<ColumnSpec> = reader
        .headers()?
        .iter()
        .map(|h| ColumnSpec::feature(h, ColumnKind::Continuous))
        .collect();
    let table = read_csv_from(open(path)?, &columns)?;
    Ok(table.data.rows().map(<[f64]>::to_vec).collect())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let est = read_state_columns(&a.est)?;
    let truth = read_state_columns(&a.truth)?;
    let mut out = Map::new();
    for metric in &a.metrics {
        match metric {
            Metric::Mse => {
                let (Some(e), Some(t)) = (&est.probabilities, &truth.probabilities) else {
                    return Err(usage("mse needs probability columns in both --est and --truth"));
                };
                let (mse, perm) = align_and_mse(e, t)?;
                out.insert("mse".into(), json!({ "value": mse, "permutation": perm }));
            }
            Metric::Ari => {
                let (e, t) = labels(&est.labels, &truth.labels)?;
                out.insert("ari".into(), json!(adjusted_rand_index(t, e)?));
            }
            Metric::Bacc => {
                let (e, t) = labels(&est.labels, &truth.labels)?;
                let (score, perm) = aligned_balanced_accuracy(t, e)?;
                out.insert("balanced_accuracy".into(), json!({ "value": score, "permutation": perm }));
            }
            Metric::Stats => {
                let Some(path) = &a.data else {
                    return Err(usage("stats needs --data"));
                };
                let raw = read_numeric(path)?;
                let e = est.labels.as_ref().ok_or_else(|| usage("stats needs estimated labels"))?;
                let n_states = match &est.probabilities {
                    Some(s) => s.n_states(),
                    None => e.iter().max().map_or(0, |m| m + 1),
                };
                let stats = state_conditional_stats(&raw, e, n_states)?;
                out.insert("stats".into(), serde_json::to_value(stats)?);
            }
        }
    }
    write_json(&Value::Object(out), &a.out)
}

fn labels<'a>(est: &'a Option<Vec<usize>>, truth: &'a Option<Vec<usize>>) -> Result<(&'a [usize], &'a [usize])> {
    match (est, truth) {
        (Some(e), Some(t)) => Ok((e, t)),
        _ => Err(usage("label metrics need labels or probabilities in both files")),
    }
}
