//! Coordinate-descent estimation: random simplex initialization, sequential
//! membership sweeps, prototype updates and best-of-restarts selection.

mod prototypes;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    distance_table, feature_ranges, objective_with_distances, DataMatrix, FeatureRanges,
    FitConfig, MembershipMatrix, Metric, PrototypeSet,
};
use crate::simplex::{SubproblemSolver, SubproblemSpec};

pub use prototypes::{update_prototypes, weighted_median, weighted_mode, PrototypeUpdate};
use prototypes::PrototypeUpdater;

/// Outcome of [`fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub memberships: MembershipMatrix,
    pub prototypes: PrototypeSet,
    /// Final objective of the selected restart.
    pub objective: f64,
    /// Objective at initialization and after every outer iteration of the
    /// selected restart.
    pub objective_trace: Vec<f64>,
    pub restart_objectives: Vec<f64>,
    pub best_restart: usize,
    pub iterations_used: usize,
    /// Number of degenerate-state reseeds performed in the selected restart.
    pub rescued_states: usize,
    pub seed: u64,
}

/// Random stream for one restart: the configured seed selects the key and the
/// restart index selects an independent ChaCha stream.
pub fn restart_rng(seed: u64, restart_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart_index as u64);
    rng
}

/// Rows drawn independently from the flat Dirichlet distribution.
pub fn random_memberships<R: Rng + ?Sized>(n_rows: usize, n_states: usize, rng: &mut R) -> MembershipMatrix {
    let mut cells = Vec::with_capacity(n_rows * n_states);
    for _ in 0..n_rows {
        let start = cells.len();
        cells.extend((0..n_states).map(|_| rng.sample::<f64, _>(Exp1)));
        let total: f64 = cells[start..].iter().sum();
        cells[start..].iter_mut().for_each(|x| *x /= total);
    }
    MembershipMatrix::from_cells_unchecked(n_states, cells)
}

/// Initial memberships (flat Dirichlet rows) and the prototypes they imply.
pub fn initialize(
    data: &DataMatrix,
    cfg: &FitConfig,
    restart_index: usize,
) -> Result<(MembershipMatrix, PrototypeSet)> {
    cfg.validate_for(data.schema(), data.n_rows())?;
    let mut rng = restart_rng(cfg.seed, restart_index);
    let s = random_memberships(data.n_rows(), cfg.n_states, &mut rng);
    let up = PrototypeUpdater::new(data, cfg.distance).update(&s, cfg.fuzziness, &mut rng);
    Ok((s, up.prototypes))
}

/// Per-row argmax; ties resolve to the lowest state index.
pub fn map_labels(s: &MembershipMatrix) -> Vec<usize> {
    s.rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0, |best, (k, &x)| if x > row[best] { k } else { best })
        })
        .collect()
}

struct Fitter<'a> {
    data: &'a DataMatrix,
    cfg: &'a FitConfig,
    metric: Metric,
}

struct RestartOutcome {
    memberships: MembershipMatrix,
    prototypes: PrototypeSet,
    objective: f64,
    trace: Vec<f64>,
    iterations: usize,
    rescued: usize,
}

impl<'a> Fitter<'a> {
    fn new(data: &'a DataMatrix, cfg: &'a FitConfig, ranges: &FeatureRanges) -> Self {
        Fitter {
            data,
            cfg,
            metric: Metric::new(cfg.distance, ranges),
        }
    }

    /// Gauss-Seidel pass over t = 1..T: each row sees the already updated
    /// previous row and the not yet updated next row.
    fn sweep(&self, s: &mut MembershipMatrix, distances: &[f64], solver: &mut SubproblemSolver) {
        let k = s.n_states();
        let n = s.n_rows();
        let cells = s.as_mut_slice();
        let mut out = vec![0.0; k];
        for t in 0..n {
            let spec = SubproblemSpec {
                distances: &distances[t * k..(t + 1) * k],
                fuzziness: self.cfg.fuzziness,
                jump_penalty: self.cfg.jump_penalty,
                prev: (t > 0).then(|| &cells[(t - 1) * k..t * k]),
                next: (t + 1 < n).then(|| &cells[(t + 1) * k..(t + 2) * k]),
                warm_start: &cells[t * k..(t + 1) * k],
            };
            solver.solve_into(&spec, self.cfg.pgd_max_iter, self.cfg.pgd_tol, &mut out);
            cells[t * k..(t + 1) * k].copy_from_slice(&out);
        }
    }

    fn run<R: Rng + ?Sized>(&self, init: MembershipMatrix, rng: &mut R) -> RestartOutcome {
        let cfg = self.cfg;
        let mut updater = PrototypeUpdater::new(self.data, cfg.distance);
        let mut solver = SubproblemSolver::default();
        let mut s = init;
        let first = updater.update(&s, cfg.fuzziness, rng);
        let mut rescued = first.rescued.len();
        let mut mu = first.prototypes;
        let mut g = distance_table(self.data, &mu, &self.metric);
        let mut f = objective_with_distances(&g, &s, cfg.fuzziness, cfg.jump_penalty);
        let mut trace = vec![f];
        let mut iterations = 0;
        while iterations < cfg.max_outer_iter {
            iterations += 1;
            self.sweep(&mut s, &g, &mut solver);
            let up = updater.update(&s, cfg.fuzziness, rng);
            rescued += up.rescued.len();
            mu = up.prototypes;
            g = distance_table(self.data, &mu, &self.metric);
            let f_new = objective_with_distances(&g, &s, cfg.fuzziness, cfg.jump_penalty);
            trace.push(f_new);
            let rel = (f - f_new).abs() / f.max(1.0);
            f = f_new;
            if rel < cfg.outer_tol {
                break;
            }
        }
        RestartOutcome {
            memberships: s,
            prototypes: mu,
            objective: f,
            trace,
            iterations,
            rescued,
        }
    }
}

fn into_result(outcome: RestartOutcome, restart_objectives: Vec<f64>, best: usize, seed: u64) -> FitResult {
    FitResult {
        memberships: outcome.memberships,
        prototypes: outcome.prototypes,
        objective: outcome.objective,
        objective_trace: outcome.trace,
        restart_objectives,
        best_restart: best,
        iterations_used: outcome.iterations,
        rescued_states: outcome.rescued,
        seed,
    }
}

/// Fits a fuzzy jump model with `cfg.restarts` random initializations and
/// keeps the restart with the lowest final objective (ties: lowest index).
pub fn fit(data: &DataMatrix, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate_for(data.schema(), data.n_rows())?;
    let ranges = feature_ranges(data);
    let fitter = Fitter::new(data, cfg, &ranges);
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(cfg.seed, r);
            let init = random_memberships(data.n_rows(), cfg.n_states, &mut rng);
            fitter.run(init, &mut rng)
        })
        .collect();
    let objectives: Vec<f64> = outcomes.iter().map(|o| o.objective).collect();
    if objectives.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("objective"));
    }
    let best = objectives
        .iter()
        .enumerate()
        .fold(0, |b, (i, &f)| if f < objectives[b] { i } else { b });
    let outcome = outcomes.into_iter().nth(best).expect("at least one restart");
    Ok(into_result(outcome, objectives, best, cfg.seed))
}

/// Single coordinate-descent run from the given initial memberships.
/// Randomness (degenerate-state reseeding only) uses restart stream 0.
pub fn fit_from(data: &DataMatrix, cfg: &FitConfig, init: &MembershipMatrix) -> Result<FitResult> {
    cfg.validate_for(data.schema(), data.n_rows())?;
    if init.n_rows() != data.n_rows() || init.n_states() != cfg.n_states {
        return Err(Error::DimensionMismatch {
            context: "initial memberships vs data rows and K",
            expected: data.n_rows() * cfg.n_states,
            found: init.n_rows() * init.n_states(),
        });
    }
    let ranges = feature_ranges(data);
    let fitter = Fitter::new(data, cfg, &ranges);
    let mut rng = restart_rng(cfg.seed, 0);
    let outcome = fitter.run(init.clone(), &mut rng);
    if !outcome.objective.is_finite() {
        return Err(Error::NonFinite("objective"));
    }
    let objectives = vec![outcome.objective];
    Ok(into_result(outcome, objectives, 0, cfg.seed))
}

/// One sequential membership sweep for fixed prototypes.
pub fn sweep_memberships(
    data: &DataMatrix,
    s: &MembershipMatrix,
    prototypes: &PrototypeSet,
    cfg: &FitConfig,
    ranges: &FeatureRanges,
) -> Result<MembershipMatrix> {
    cfg.validate_schema(data.schema())?;
    if s.n_rows() != data.n_rows() || s.n_states() != prototypes.n_states() {
        return Err(Error::DimensionMismatch {
            context: "memberships vs data rows and prototypes",
            expected: data.n_rows() * prototypes.n_states(),
            found: s.n_rows() * s.n_states(),
        });
    }
    if prototypes.n_features() != data.n_features() {
        return Err(Error::DimensionMismatch {
            context: "prototype width vs features",
            expected: data.n_features(),
            found: prototypes.n_features(),
        });
    }
    let fitter = Fitter::new(data, cfg, ranges);
    let g = distance_table(data, prototypes, &fitter.metric);
    let mut out = s.clone();
    fitter.sweep(&mut out, &g, &mut SubproblemSolver::default());
    Ok(out)
}

#[cfg(test)]
mod tests;
