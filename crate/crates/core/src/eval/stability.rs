use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::fit;
use crate::model::{DataMatrix, FitConfig};

use super::metrics::align_and_mse;

/// Evenly spaced grid `min, min + step, ..., max` (inclusive), with values
/// rounded to 12 decimals.
pub fn lambda_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && min.is_finite() && max.is_finite() && max >= min) {
        return Err(Error::InvalidConfig(format!(
            "grid needs min <= max and step > 0, got {min}, {max}, {step}"
        )));
    }
    let n = ((max - min) / step).round();
    if ((n * step) - (max - min)).abs() > 1e-9 * step.max(1.0) {
        return Err(Error::InvalidConfig(format!(
            "step {step} does not divide [{min}, {max}] evenly"
        )));
    }
    Ok((0..=n as usize)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub lambda: f64,
    pub next_lambda: f64,
    /// Aligned mean squared difference between the two fits.
    pub mse: f64,
}

/// Fits every grid value with the same seed and reports the aligned mean
/// squared difference between consecutive membership estimates.
pub fn lambda_stability_curve(
    data: &DataMatrix,
    cfg: &FitConfig,
    grid: &[f64],
) -> Result<Vec<StabilityPoint>> {
    if grid.len() < 2 {
        return Err(Error::InvalidConfig("stability curve needs at least two grid values".into()));
    }
    let step = grid[1] - grid[0];
    for w in grid.windows(2) {
        if !(w[1] > w[0]) || ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
            return Err(Error::InvalidConfig("lambda grid must be increasing with a uniform step".into()));
        }
    }
    let fits = grid
        .iter()
        .map(|&lambda| fit(data, &cfg.clone().with_jump_penalty(lambda)))
        .collect::<Result<Vec<_>>>()?;
    fits.windows(2)
        .zip(grid.windows(2))
        .map(|(f, l)| {
            let (mse, _) = align_and_mse(&f[1].memberships, &f[0].memberships)?;
            Ok(StabilityPoint { lambda: l[0], next_lambda: l[1], mse })
        })
        .collect()
}
