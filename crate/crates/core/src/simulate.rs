//! Synthetic regime-switching series: VAR(1) latent scores, softmax mixing
//! proportions and equicorrelated Gaussian emissions around fixed centroids.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::restart_rng;
use crate::model::{DataMatrix, MembershipMatrix};

/// Named simulation presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Small innovations: mixing proportions stay near the simplex centre.
    Soft,
    /// Large innovations: mixing proportions sit near the simplex vertices.
    Hard,
}

impl Scenario {
    pub fn preset(self) -> ScenarioPreset {
        match self {
            Scenario::Soft => ScenarioPreset { tau: 0.2, phi: 0.99 },
            Scenario::Hard => ScenarioPreset { tau: 5.0, phi: 0.99 },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Soft => "soft",
            Scenario::Hard => "hard",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(Scenario::Soft),
            "hard" => Ok(Scenario::Hard),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }
}

/// Innovation scale and persistence of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPreset {
    pub tau: f64,
    pub phi: f64,
}

/// Looks up a preset by name (`"soft"` or `"hard"`).
pub fn scenario_preset(name: &str) -> Result<ScenarioPreset> {
    name.parse::<Scenario>().map(Scenario::preset)
}

/// Centroids spaced evenly from `(1, ..., 1)` down to `(-1, ..., -1)`.
pub fn default_centroids(n_states: usize, n_features: usize) -> Vec<Vec<f64>> {
    let last = n_states.saturating_sub(1).max(1) as f64;
    (0..n_states)
        .map(|k| vec![1.0 - 2.0 * k as f64 / last; n_features])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_states: usize,
    pub n_features: usize,
    pub n_obs: usize,
    pub phi: f64,
    pub tau: f64,
    pub rho: f64,
    pub centroids: Vec<Vec<f64>>,
    pub burn_in: usize,
    pub seed: u64,
}

impl SimulationConfig {
    /// Configuration with default centroids, `phi = 0.99`, `rho = 0` and
    /// 100 burn-in steps.
    pub fn new(n_states: usize, n_features: usize, n_obs: usize, tau: f64) -> Self {
        Self {
            n_states,
            n_features,
            n_obs,
            phi: 0.99,
            tau,
            rho: 0.0,
            centroids: default_centroids(n_states, n_features),
            burn_in: 100,
            seed: 0,
        }
    }

    pub fn from_scenario(scenario: Scenario, n_states: usize, n_features: usize, n_obs: usize) -> Self {
        let preset = scenario.preset();
        Self::new(n_states, n_features, n_obs, preset.tau).with_phi(preset.phi)
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_centroids(mut self, centroids: Vec<Vec<f64>>) -> Self {
        self.centroids = centroids;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_states < 2 {
            return bad(format!("K must be at least 2, got {}", self.n_states));
        }
        if self.n_features < 1 {
            return bad("P must be at least 1".into());
        }
        if self.n_obs < 2 {
            return bad(format!("T must be at least 2, got {}", self.n_obs));
        }
        if !(0.0..1.0).contains(&self.phi) {
            return bad(format!("phi must lie in [0, 1), got {}", self.phi));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !self.rho.is_finite() {
            return Err(Error::NonFinite("rho"));
        }
        if self.centroids.len() != self.n_states {
            return Err(Error::DimensionMismatch {
                context: "centroid count vs K",
                expected: self.n_states,
                found: self.centroids.len(),
            });
        }
        for c in &self.centroids {
            if c.len() != self.n_features {
                return Err(Error::DimensionMismatch {
                    context: "centroid length vs P",
                    expected: self.n_features,
                    found: c.len(),
                });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("centroids"));
            }
        }
        equicorrelation_sqrt(self.n_features, self.rho).map(|_| ())
    }
}

/// Symmetric square root `a I + b 11'` of the unit-variance equicorrelation
/// matrix, returned as `(a, b)`.
pub fn equicorrelation_sqrt(n_features: usize, rho: f64) -> Result<(f64, f64)> {
    let p = n_features as f64;
    let small = 1.0 - rho;
    let large = 1.0 + (p - 1.0) * rho;
    if n_features == 1 {
        return Ok((1.0, 0.0));
    }
    if !(small > 0.0 && large > 0.0) {
        return Err(Error::NotPositiveDefinite { rho, p: n_features });
    }
    let a = small.sqrt();
    Ok((a, (large.sqrt() - a) / p))
}

/// One simulated replica.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSeries {
    /// T x P observations.
    pub y: Vec<Vec<f64>>,
    /// True mixing proportions.
    pub pi_true: MembershipMatrix,
    /// Sampled component of each observation (0-based).
    pub component_labels: Vec<usize>,
    /// T x (K-1) latent scores.
    pub alpha: Vec<Vec<f64>>,
}

impl SimulatedSeries {
    pub fn data(&self) -> Result<DataMatrix> {
        DataMatrix::from_continuous(&self.y)
    }
}

fn latent_rng(cfg: &SimulationConfig) -> ChaCha8Rng {
    restart_rng(cfg.seed, 0)
}

fn emission_rng(cfg: &SimulationConfig) -> ChaCha8Rng {
    restart_rng(cfg.seed, 1)
}

fn alpha_path(cfg: &SimulationConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let dim = cfg.n_states - 1;
    let mut state = vec![0.0; dim];
    let mut step = |state: &mut Vec<f64>| {
        for a in state.iter_mut() {
            let eta: f64 = StandardNormal.sample(rng);
            *a = cfg.phi * *a + cfg.tau * eta;
        }
    };
    for _ in 0..cfg.burn_in {
        step(&mut state);
    }
    (0..cfg.n_obs)
        .map(|_| {
            step(&mut state);
            state.clone()
        })
        .collect()
}

/// Latent VAR(1) scores `alpha_t = phi alpha_{t-1} + eta_t`, started at zero
/// and recorded after the burn-in.
pub fn simulate_alpha(cfg: &SimulationConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    Ok(alpha_path(cfg, &mut latent_rng(cfg)))
}

/// Softmax of `(alpha_t, 0)` for every row.
pub fn softmax_pi(alpha: &[Vec<f64>]) -> Result<MembershipMatrix> {
    let rows = alpha
        .iter()
        .map(|a| {
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("latent scores"));
            }
            let max = a.iter().copied().fold(0.0, f64::max);
            let mut row: Vec<f64> = a.iter().map(|x| (x - max).exp()).collect();
            row.push((-max).exp());
            let z: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= z);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    MembershipMatrix::from_rows(&rows)
}

/// Draws a full replica: latent path, mixing proportions, component labels
/// and emissions.
pub fn sample_series(cfg: &SimulationConfig) -> Result<SimulatedSeries> {
    cfg.validate()?;
    let (a, b) = equicorrelation_sqrt(cfg.n_features, cfg.rho)?;
    let alpha = alpha_path(cfg, &mut latent_rng(cfg));
    let pi_true = softmax_pi(&alpha)?;

    let mut rng = emission_rng(cfg);
    let mut labels = Vec::with_capacity(cfg.n_obs);
    let mut y = Vec::with_capacity(cfg.n_obs);
    let mut z = vec![0.0; cfg.n_features];
    for pi in pi_true.rows() {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut c = pi.len() - 1;
        for (k, &p) in pi.iter().enumerate() {
            cum += p;
            if u < cum {
                c = k;
                break;
            }
        }
        z.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
        let total: f64 = z.iter().sum();
        y.push(
            cfg.centroids[c]
                .iter()
                .zip(&z)
                .map(|(mu, zi)| mu + a * zi + b * total)
                .collect(),
        );
        labels.push(c);
    }
    Ok(SimulatedSeries { y, pi_true, component_labels: labels, alpha })
}
