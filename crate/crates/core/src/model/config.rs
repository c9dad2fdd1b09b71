use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::distance::DistanceMode;
use super::schema::FeatureSchema;

/// Hyperparameters and solver controls for a fuzzy jump model fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Number of states K.
    pub n_states: usize,
    /// Fuzziness exponent m >= 1.
    pub fuzziness: f64,
    /// Jump penalty lambda >= 0.
    pub jump_penalty: f64,
    pub distance: DistanceMode,
    pub restarts: usize,
    pub max_outer_iter: usize,
    /// Relative objective change below which the outer loop stops.
    pub outer_tol: f64,
    pub pgd_max_iter: usize,
    pub pgd_tol: f64,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(n_states: usize, fuzziness: f64, jump_penalty: f64) -> Self {
        FitConfig {
            n_states,
            fuzziness,
            jump_penalty,
            distance: DistanceMode::Gower,
            restarts: 10,
            max_outer_iter: 50,
            outer_tol: 1e-8,
            pgd_max_iter: 200,
            pgd_tol: 1e-10,
            seed: 0,
        }
    }

    pub fn with_distance(mut self, distance: DistanceMode) -> Self {
        self.distance = distance;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_outer_iter(mut self, n: usize) -> Self {
        self.max_outer_iter = n;
        self
    }

    pub fn with_outer_tol(mut self, tol: f64) -> Self {
        self.outer_tol = tol;
        self
    }

    pub fn with_pgd(mut self, max_iter: usize, tol: f64) -> Self {
        self.pgd_max_iter = max_iter;
        self.pgd_tol = tol;
        self
    }

    pub fn with_jump_penalty(mut self, lambda: f64) -> Self {
        self.jump_penalty = lambda;
        self
    }

    pub fn with_fuzziness(mut self, m: f64) -> Self {
        self.fuzziness = m;
        self
    }

    /// Checks the configuration on its own.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_states < 2 {
            return bad(format!("K must be at least 2, got {}", self.n_states));
        }
        if !(self.fuzziness.is_finite() && self.fuzziness >= 1.0) {
            return bad(format!("m must be a finite value >= 1, got {}", self.fuzziness));
        }
        if !(self.jump_penalty.is_finite() && self.jump_penalty >= 0.0) {
            return bad(format!("lambda must be finite and >= 0, got {}", self.jump_penalty));
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if self.max_outer_iter == 0 || self.pgd_max_iter == 0 {
            return bad("iteration limits must be positive".into());
        }
        if !(self.outer_tol >= 0.0 && self.pgd_tol >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        Ok(())
    }

    /// Checks the configuration against a data schema.
    pub fn validate_schema(&self, schema: &FeatureSchema) -> Result<()> {
        self.validate()?;
        if self.distance == DistanceMode::SquaredEuclidean && !schema.all_continuous() {
            return Err(Error::InvalidConfig(
                "squared Euclidean distance requires an all-continuous schema".into(),
            ));
        }
        Ok(())
    }

    /// Checks the configuration against a data set about to be fitted.
    pub fn validate_for(&self, schema: &FeatureSchema, n_rows: usize) -> Result<()> {
        self.validate_schema(schema)?;
        if self.n_states > n_rows {
            return Err(Error::InvalidConfig(format!(
                "K = {} exceeds the number of time points {n_rows}",
                self.n_states
            )));
        }
        Ok(())
    }
}
