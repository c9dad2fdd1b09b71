use serde::Serialize;

use crate::error::{Error, Result};

/// Summary of the observations assigned to one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateStats {
    pub state: usize,
    pub count: usize,
    pub mean: Vec<f64>,
    /// Sample standard deviation (denominator n - 1).
    pub sd: Vec<f64>,
    /// Pearson correlations; `None` where a column has zero spread.
    pub correlation: Vec<Vec<Option<f64>>>,
}

/// Per-state mean, standard deviation and correlation matrix of the columns
/// of `raw` (T rows), grouping rows by `labels` (states `0..n_states`).
pub fn state_conditional_stats(
    raw: &[Vec<f64>],
    labels: &[usize],
    n_states: usize,
) -> Result<Vec<StateStats>> {
    if raw.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "labels vs series rows",
            expected: raw.len(),
            found: labels.len(),
        });
    }
    let width = raw.first().map_or(0, Vec::len);
    if let Some(row) = raw.iter().find(|r| r.len() != width) {
        return Err(Error::DimensionMismatch { context: "series row width", expected: width, found: row.len() });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_states) {
        return Err(Error::InvalidInput(format!("label {bad} outside 0..{n_states}")));
    }
    (0..n_states)
        .map(|state| {
            let rows: Vec<&Vec<f64>> =
                raw.iter().zip(labels).filter(|(_, &l)| l == state).map(|(r, _)| r).collect();
            let n = rows.len();
            if n < 2 {
                return Err(Error::InsufficientObservations { state, count: n });
            }
            let mean: Vec<f64> =
                (0..width).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
            let mut cov = vec![vec![0.0; width]; width];
            for r in &rows {
                for i in 0..width {
                    for j in 0..width {
                        cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
                    }
                }
            }
            let denom = (n - 1) as f64;
            let sd: Vec<f64> = (0..width).map(|i| (cov[i][i] / denom).sqrt()).collect();
            let correlation = (0..width)
                .map(|i| {
                    (0..width)
                        .map(|j| {
                            (sd[i] > 0.0 && sd[j] > 0.0)
                                .then(|| cov[i][j] / (cov[i][i] * cov[j][j]).sqrt())
                        })
                        .collect()
                })
                .collect();
            Ok(StateStats { state, count: n, mean, sd, correlation })
        })
        .collect()
}
