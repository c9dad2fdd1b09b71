use crate::error::{Error, Result};

use super::config::FitConfig;
use super::data::DataMatrix;
use super::distance::{FeatureRanges, Metric};
use super::membership::{MembershipMatrix, PrototypeSet};

/// Row-major T x K table of distances `g(z_t, mu_k)`.
pub fn distance_table(data: &DataMatrix, prototypes: &PrototypeSet, metric: &Metric) -> Vec<f64> {
    let k = prototypes.n_states();
    let mut out = Vec::with_capacity(data.n_rows() * k);
    for row in data.rows() {
        out.extend(prototypes.rows().map(|mu| metric.distance(row, mu)));
    }
    out
}

/// Penalized objective from a precomputed distance table:
/// `sum_t sum_k s_tk^m g_tk + lambda * sum_{t>=2} (||s_{t-1} - s_t||_1)^2`.
pub fn objective_with_distances(
    distances: &[f64],
    memberships: &MembershipMatrix,
    fuzziness: f64,
    jump_penalty: f64,
) -> f64 {
    let k = memberships.n_states();
    let fit: f64 = memberships
        .as_slice()
        .chunks_exact(k)
        .zip(distances.chunks_exact(k))
        .map(|(s, g)| {
            s.iter()
                .zip(g)
                .map(|(&s, &g)| fuzzy_weight(s, fuzziness) * g)
                .sum::<f64>()
        })
        .sum();
    let jumps: f64 = memberships
        .as_slice()
        .chunks_exact(memberships.n_states())
        .zip(memberships.rows().skip(1))
        .map(|(a, b)| {
            let l1: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
            l1 * l1
        })
        .sum();
    fit + jump_penalty * jumps
}

/// Full fuzzy jump model objective for the given memberships and prototypes.
pub fn objective(
    data: &DataMatrix,
    memberships: &MembershipMatrix,
    prototypes: &PrototypeSet,
    cfg: &FitConfig,
    ranges: &FeatureRanges,
) -> Result<f64> {
    let p = data.n_features();
    if memberships.n_rows() != data.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "membership rows vs data rows",
            expected: data.n_rows(),
            found: memberships.n_rows(),
        });
    }
    if memberships.n_states() != prototypes.n_states() {
        return Err(Error::DimensionMismatch {
            context: "membership states vs prototypes",
            expected: prototypes.n_states(),
            found: memberships.n_states(),
        });
    }
    if prototypes.n_features() != p || ranges.len() != p {
        return Err(Error::DimensionMismatch {
            context: "prototype or range width vs features",
            expected: p,
            found: prototypes.n_features().min(ranges.len()),
        });
    }
    let metric = Metric::new(cfg.distance, ranges);
    let g = distance_table(data, prototypes, &metric);
    Ok(objective_with_distances(
        &g,
        memberships,
        cfg.fuzziness,
        cfg.jump_penalty,
    ))
}

/// `s^m`, exact for the common exponents.
#[inline]
pub(crate) fn fuzzy_weight(s: f64, m: f64) -> f64 {
    if m == 1.0 {
        s
    } else if m == 2.0 {
        s * s
    } else if s <= 0.0 {
        0.0
    } else {
        s.powf(m)
    }
}
