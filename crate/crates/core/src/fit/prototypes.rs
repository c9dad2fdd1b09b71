use rand::Rng;

use crate::error::{Error, Result};
use crate::model::objective::fuzzy_weight;
use crate::model::{DataMatrix, DistanceMode, FeatureKind, MembershipMatrix, PrototypeSet};

/// Smallest value whose cumulative weight reaches half the total weight.
///
/// Returns `None` when the inputs are empty, of different lengths, or carry
/// no positive weight.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> Option<f64> {
    if values.is_empty() || values.len() != weights.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    median_in_order(&order, values, weights)
}

fn median_in_order(order: &[usize], values: &[f64], w: &[f64]) -> Option<f64> {
    let total: f64 = order.iter().map(|&i| w[i]).sum();
    if !(total > 0.0) {
        return None;
    }
    let half = 0.5 * total;
    let mut cum = 0.0;
    for &i in order {
        cum += w[i];
        if cum >= half {
            return Some(values[i]);
        }
    }
    order.last().map(|&i| values[i])
}

/// Category with the largest total weight; ties go to the lowest level index.
pub fn weighted_mode(levels: &[usize], weights: &[f64], n_levels: usize) -> Option<usize> {
    if levels.len() != weights.len() || levels.iter().any(|&l| l >= n_levels) {
        return None;
    }
    let mut totals = vec![0.0; n_levels];
    for (&l, &w) in levels.iter().zip(weights) {
        totals[l] += w;
    }
    if !totals.iter().any(|&t| t > 0.0) {
        return None;
    }
    Some(
        totals
            .iter()
            .enumerate()
            .fold(0, |best, (l, &t)| if t > totals[best] { l } else { best }),
    )
}

/// Prototypes plus the states whose weight vanished and were reseeded from a
/// random data row.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeUpdate {
    pub prototypes: PrototypeSet,
    pub rescued: Vec<usize>,
}

/// Prototype step with per-column sort orders cached across iterations.
#[derive(Clone, Debug)]
pub(crate) struct PrototypeUpdater<'a> {
    data: &'a DataMatrix,
    mode: DistanceMode,
    sorted: Vec<Option<Vec<usize>>>,
    weights: Vec<f64>,
}

impl<'a> PrototypeUpdater<'a> {
    pub(crate) fn new(data: &'a DataMatrix, mode: DistanceMode) -> Self {
        let sorted = data
            .schema()
            .features()
            .iter()
            .enumerate()
            .map(|(p, f)| {
                (mode == DistanceMode::Gower && f.is_continuous()).then(|| {
                    let col: Vec<f64> = data.column(p).collect();
                    let mut order: Vec<usize> = (0..col.len()).collect();
                    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
                    order
                })
            })
            .collect();
        PrototypeUpdater {
            data,
            mode,
            sorted,
            weights: Vec::new(),
        }
    }

    pub(crate) fn update<R: Rng + ?Sized>(
        &mut self,
        s: &MembershipMatrix,
        m: f64,
        rng: &mut R,
    ) -> PrototypeUpdate {
        let data = self.data;
        let n = data.n_rows();
        let k = s.n_states();
        let p = data.n_features();
        self.weights.clear();
        self.weights
            .extend(s.as_slice().iter().map(|&x| fuzzy_weight(x, m)));
        let w = &self.weights;

        let mut cells = vec![0.0; k * p];
        let mut rescued = Vec::new();
        for state in 0..k {
            let total: f64 = (0..n).map(|t| w[t * k + state]).sum();
            let proto = &mut cells[state * p..(state + 1) * p];
            if !(total > 0.0) {
                let t = rng.random_range(0..n);
                proto.copy_from_slice(data.row(t));
                rescued.push(state);
                continue;
            }
            for (j, slot) in proto.iter_mut().enumerate() {
                *slot = match (&data.schema().feature(j).kind, self.mode) {
                    (FeatureKind::Continuous, DistanceMode::SquaredEuclidean) => {
                        data.column(j)
                            .enumerate()
                            .map(|(t, x)| w[t * k + state] * x)
                            .sum::<f64>()
                            / total
                    }
                    (FeatureKind::Continuous, DistanceMode::Gower) => {
                        let order = self.sorted[j].as_deref().expect("sort order cached");
                        weighted_median_sorted(order, data, j, w, k, state)
                    }
                    (FeatureKind::Categorical { levels }, _) => {
                        let mut totals = vec![0.0; levels.len()];
                        for (t, x) in data.column(j).enumerate() {
                            totals[x as usize] += w[t * k + state];
                        }
                        let best = totals
                            .iter()
                            .enumerate()
                            .fold(0, |b, (l, &v)| if v > totals[b] { l } else { b });
                        best as f64
                    }
                };
            }
        }
        PrototypeUpdate {
            prototypes: PrototypeSet::new(p, cells).expect("prototype cells are finite"),
            rescued,
        }
    }
}

fn weighted_median_sorted(
    order: &[usize],
    data: &DataMatrix,
    feature: usize,
    w: &[f64],
    k: usize,
    state: usize,
) -> f64 {
    let total: f64 = order.iter().map(|&t| w[t * k + state]).sum();
    let half = 0.5 * total;
    let mut cum = 0.0;
    for &t in order {
        cum += w[t * k + state];
        if cum >= half {
            return data.row(t)[feature];
        }
    }
    data.row(*order.last().expect("non-empty data"))[feature]
}

/// Prototype step of the coordinate descent: weighted medians and modes
/// under Gower distance, weighted means under squared Euclidean distance,
/// with weights `s_tk^m`.
pub fn update_prototypes<R: Rng + ?Sized>(
    data: &DataMatrix,
    s: &MembershipMatrix,
    m: f64,
    mode: DistanceMode,
    rng: &mut R,
) -> Result<PrototypeUpdate> {
    if s.n_rows() != data.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "membership rows vs data rows",
            expected: data.n_rows(),
            found: s.n_rows(),
        });
    }
    if mode == DistanceMode::SquaredEuclidean && !data.schema().all_continuous() {
        return Err(Error::InvalidConfig(
            "weighted means need an all-continuous schema".into(),
        ));
    }
    Ok(PrototypeUpdater::new(data, mode).update(s, m, rng))
}
