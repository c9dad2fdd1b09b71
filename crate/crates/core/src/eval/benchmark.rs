use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit;
use crate::model::FitConfig;
use crate::simulate::{sample_series, Scenario, SimulationConfig};

use super::metrics::align_and_mse;
use super::stability::lambda_grid;

/// Monte Carlo design: simulate `replicas` series and fit every
/// `(lambda, m)` cell on each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub scenario: Scenario,
    pub n_states: usize,
    pub n_obs: usize,
    pub n_features: usize,
    pub replicas: usize,
    pub lambda_grid: Vec<f64>,
    pub m_grid: Vec<f64>,
    pub base_seed: u64,
    pub rho: f64,
    pub restarts: usize,
}

impl BenchmarkSpec {
    /// Full design with `lambda = 0, 0.05, ..., 1` and
    /// `m in {1.01, 1.25, 1.5, 1.75, 2}`.
    pub fn new(scenario: Scenario, n_states: usize, n_obs: usize, n_features: usize, replicas: usize) -> Self {
        Self {
            scenario,
            n_states,
            n_obs,
            n_features,
            replicas,
            lambda_grid: lambda_grid(0.0, 1.0, 0.05).expect("static grid"),
            m_grid: vec![1.01, 1.25, 1.5, 1.75, 2.0],
            base_seed: 0,
            rho: 0.0,
            restarts: 10,
        }
    }

    pub fn with_grids(mut self, lambda_grid: Vec<f64>, m_grid: Vec<f64>) -> Self {
        self.lambda_grid = lambda_grid;
        self.m_grid = m_grid;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::InvalidConfig("at least one replica is required".into()));
        }
        if self.lambda_grid.is_empty() || self.m_grid.is_empty() {
            return Err(Error::InvalidConfig("benchmark grids must be non-empty".into()));
        }
        self.simulation(0).validate()?;
        for &lambda in &self.lambda_grid {
            for &m in &self.m_grid {
                self.fit_config(lambda, m, 0).validate()?;
            }
        }
        Ok(())
    }

    /// Simulation settings of replica `r`.
    pub fn simulation(&self, replica: usize) -> SimulationConfig {
        SimulationConfig::from_scenario(self.scenario, self.n_states, self.n_features, self.n_obs)
            .with_rho(self.rho)
            .with_seed(self.base_seed.wrapping_add(replica as u64))
    }

    fn fit_config(&self, lambda: f64, m: f64, replica: usize) -> FitConfig {
        FitConfig::new(self.n_states, m, lambda)
            .with_restarts(self.restarts)
            .with_seed(self.base_seed.wrapping_add(replica as u64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub lambda: f64,
    pub m: f64,
    pub mean_mse: f64,
    /// Monte Carlo standard deviation across replicas (0 for one replica).
    pub sd_mse: f64,
    pub replica_mse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub fits: usize,
    pub total_seconds: f64,
    pub mean_fit_seconds: f64,
    pub max_fit_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub spec: BenchmarkSpec,
    /// Cells in grid order: `m` outer, `lambda` inner.
    pub cells: Vec<CellSummary>,
    pub best: CellSummary,
    pub runtime: RuntimeStats,
}

impl BenchmarkReport {
    pub fn cell(&self, lambda: f64, m: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| (c.lambda - lambda).abs() < 1e-9 && (c.m - m).abs() < 1e-9)
    }

    /// Long-format table, one row per cell.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scenario", "k", "t", "p", "lambda", "m", "mean_mse", "sd_mse", "replicas"])?;
        let s = &self.spec;
        for c in &self.cells {
            w.write_record([
                s.scenario.name().to_string(),
                s.n_states.to_string(),
                s.n_obs.to_string(),
                s.n_features.to_string(),
                c.lambda.to_string(),
                c.m.to_string(),
                c.mean_mse.to_string(),
                c.sd_mse.to_string(),
                c.replica_mse.len().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("benchmark csv", e))?;
        Ok(())
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the design. Replicas and cells execute in parallel; the report is
/// deterministic apart from its runtime statistics.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    spec.validate()?;
    let started = Instant::now();
    let series = (0..spec.replicas)
        .into_par_iter()
        .map(|r| sample_series(&spec.simulation(r)))
        .collect::<Result<Vec<_>>>()?;
    let data = series.iter().map(|s| s.data()).collect::<Result<Vec<_>>>()?;

    let cells: Vec<(f64, f64)> = spec
        .m_grid
        .iter()
        .flat_map(|&m| spec.lambda_grid.iter().map(move |&l| (l, m)))
        .collect();
    let jobs: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..spec.replicas).map(move |r| (c, r))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (lambda, m) = cells[c];
            let t0 = Instant::now();
            let res = fit(&data[r], &spec.fit_config(lambda, m, r))?;
            let seconds = t0.elapsed().as_secs_f64();
            let (mse, _) = align_and_mse(&res.memberships, &series[r].pi_true)?;
            Ok((mse, seconds))
        })
        .collect::<Result<Vec<_>>>()?;

    let summaries: Vec<CellSummary> = cells
        .iter()
        .enumerate()
        .map(|(c, &(lambda, m))| {
            let replica_mse: Vec<f64> =
                outcomes[c * spec.replicas..(c + 1) * spec.replicas].iter().map(|o| o.0).collect();
            let (mean_mse, sd_mse) = mean_sd(&replica_mse);
            CellSummary { lambda, m, mean_mse, sd_mse, replica_mse }
        })
        .collect();
    let best = summaries
        .iter()
        .fold(None::<&CellSummary>, |b, c| match b {
            Some(b) if b.mean_mse <= c.mean_mse => Some(b),
            _ => Some(c),
        })
        .expect("non-empty grid")
        .clone();
    let times: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let runtime = RuntimeStats {
        fits: times.len(),
        total_seconds: started.elapsed().as_secs_f64(),
        mean_fit_seconds: times.iter().sum::<f64>() / times.len() as f64,
        max_fit_seconds: times.iter().copied().fold(0.0, f64::max),
    };
    Ok(BenchmarkReport { spec: spec.clone(), cells: summaries, best, runtime })
}
