use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::data::DataMatrix;

/// Dissimilarity used in the fit term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    /// Range-normalized L1 for continuous features, 0/1 mismatch for categorical.
    #[default]
    Gower,
    /// Squared Euclidean distance; all-continuous data only.
    #[serde(rename = "euclidean", alias = "squared_euclidean")]
    SquaredEuclidean,
}

/// Per-feature normalizing ranges, computed once over the whole data set.
/// Categorical slots are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRanges {
    sigma: Vec<Option<f64>>,
}

impl FeatureRanges {
    pub fn new(sigma: Vec<Option<f64>>) -> Self {
        FeatureRanges { sigma }
    }

    pub fn sigma(&self) -> &[Option<f64>] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// Observed max minus min of every continuous column.
pub fn feature_ranges(data: &DataMatrix) -> FeatureRanges {
    let sigma = data
        .schema()
        .features()
        .iter()
        .enumerate()
        .map(|(p, f)| {
            f.is_continuous().then(|| {
                let (lo, hi) = data
                    .column(p)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                        (lo.min(x), hi.max(x))
                    });
                hi - lo
            })
        })
        .collect();
    FeatureRanges { sigma }
}

/// Gower distance between two encoded rows.
///
/// Continuous features contribute `|x - y| / sigma` (zero when the feature has
/// zero range); categorical features contribute 1 on mismatch.
pub fn gower_distance(x: &[f64], y: &[f64], ranges: &FeatureRanges) -> Result<f64> {
    if x.len() != ranges.len() || y.len() != ranges.len() {
        return Err(Error::SchemaMismatch(format!(
            "vectors of length {} and {} against {} features",
            x.len(),
            y.len(),
            ranges.len()
        )));
    }
    Ok(Metric::new(DistanceMode::Gower, ranges).distance(x, y))
}

pub fn squared_euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "squared euclidean operands",
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[derive(Clone, Copy, Debug)]
enum FeatureScale {
    Continuous { inv_range: f64 },
    Categorical,
}

/// Precomputed distance kernel for the hot loops of the fitter.
/// Performs no length checks.
#[derive(Clone, Debug)]
pub struct Metric {
    mode: DistanceMode,
    scales: Vec<FeatureScale>,
}

impl Metric {
    pub fn new(mode: DistanceMode, ranges: &FeatureRanges) -> Self {
        let scales = ranges
            .sigma
            .iter()
            .map(|s| match s {
                Some(r) if *r > 0.0 => FeatureScale::Continuous { inv_range: 1.0 / r },
                Some(_) => FeatureScale::Continuous { inv_range: 0.0 },
                None => FeatureScale::Categorical,
            })
            .collect();
        Metric { mode, scales }
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    #[inline]
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.mode {
            DistanceMode::SquaredEuclidean => {
                x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
            }
            DistanceMode::Gower => self
                .scales
                .iter()
                .zip(x.iter().zip(y))
                .map(|(scale, (a, b))| match *scale {
                    FeatureScale::Continuous { inv_range } => (a - b).abs() * inv_range,
                    FeatureScale::Categorical => {
                        if a == b {
                            0.0
                        } else {
                            1.0
                        }
                    }
                })
                .sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DataMatrix, Feature, FeatureSchema, Value};
    use proptest::prelude::*;

    #[test]
    fn ranges_of_columns() {
        let d = DataMatrix::from_continuous(&[vec![1.0, 5.0], vec![3.0, 5.0], vec![2.0, 5.0]])
            .unwrap();
        assert_eq!(feature_ranges(&d).sigma(), &[Some(2.0), Some(0.0)]);
    }

    #[test]
    fn categorical_slot_is_sentinel() {
        let schema = FeatureSchema::new(vec![
            Feature::continuous("x"),
            Feature::categorical("c", ["A"]),
        ])
        .unwrap();
        let d = DataMatrix::new(
            schema,
            vec![
                vec![Value::Continuous(0.0), Value::Level(0)],
                vec![Value::Continuous(4.0), Value::Level(0)],
            ],
        )
        .unwrap();
        assert_eq!(feature_ranges(&d).sigma(), &[Some(4.0), None]);
    }

    #[test]
    fn gower_examples() {
        let r = FeatureRanges::new(vec![Some(4.0), None]);
        assert_eq!(gower_distance(&[2.0, 0.0], &[2.0, 0.0], &r).unwrap(), 0.0);
        assert_eq!(gower_distance(&[2.0, 0.0], &[4.0, 1.0], &r).unwrap(), 1.5);
        let zero = FeatureRanges::new(vec![Some(0.0)]);
        assert_eq!(gower_distance(&[1.0], &[7.0], &zero).unwrap(), 0.0);
        assert!(matches!(
            gower_distance(&[1.0], &[1.0, 2.0], &zero),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn squared_euclidean_examples() {
        assert_eq!(squared_euclidean(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(squared_euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(squared_euclidean(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 5.0);
        assert!(squared_euclidean(&[1.0], &[1.0, 2.0]).is_err());
    }

    fn mixed_pair() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<(usize, usize)>, Vec<f64>)> {
        (1usize..4, 0usize..3).prop_flat_map(|(nc, nk)| {
            (
                prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), nc),
                prop::collection::vec((0usize..3, 0usize..3), nk),
                prop::collection::vec(0.0..20.0f64, nc),
            )
        })
    }

    proptest! {
        #[test]
        fn gower_symmetric_bounded((cont, cat, sig) in mixed_pair()) {
            let mut x = Vec::new();
            let mut y = Vec::new();
            let mut sigma = Vec::new();
            for (&(a, b), &s) in cont.iter().zip(&sig) {
                x.push(a);
                y.push(b);
                // keep the range consistent with the two points
                sigma.push(Some(s + (a - b).abs()));
            }
            for &(a, b) in &cat {
                x.push(a as f64);
                y.push(b as f64);
                sigma.push(None);
            }
            let r = FeatureRanges::new(sigma);
            let dxy = gower_distance(&x, &y, &r).unwrap();
            let dyx = gower_distance(&y, &x, &r).unwrap();
            prop_assert_eq!(dxy, dyx);
            prop_assert!(dxy >= 0.0 && dxy <= x.len() as f64 + 1e-12);
            prop_assert_eq!(gower_distance(&x, &x, &r).unwrap(), 0.0);
        }

        #[test]
        fn gower_invariant_to_affine_rescaling(
            col in prop::collection::vec(-10.0..10.0f64, 3..20),
            other in prop::collection::vec(-10.0..10.0f64, 3..20),
            scale in 0.01..100.0f64,
            shift in -100.0..100.0f64,
            i in 0usize..3,
            j in 0usize..3,
        ) {
            let n = col.len().min(other.len());
            let rows: Vec<Vec<f64>> = (0..n).map(|t| vec![col[t], other[t]]).collect();
            let scaled: Vec<Vec<f64>> =
                rows.iter().map(|r| vec![r[0] * scale + shift, r[1]]).collect();
            let d0 = DataMatrix::from_continuous(&rows).unwrap();
            let d1 = DataMatrix::from_continuous(&scaled).unwrap();
            let g0 = gower_distance(d0.row(i), d0.row(j), &feature_ranges(&d0)).unwrap();
            let g1 = gower_distance(d1.row(i), d1.row(j), &feature_ranges(&d1)).unwrap();
            prop_assert!((g0 - g1).abs() < 1e-12 * (1.0 + g0.abs()) + 1e-12);
        }
    }
}
