use super::*;
use crate::model::{DistanceMode, Feature, FeatureSchema, Value};
use crate::simplex::solve_subproblem;
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

/// Two continuous clusters (centres 0 and 10, spread 0.3) in blocks of
/// `block` rows, repeated `blocks` times.
fn two_block_data(block: usize, blocks: usize, seed: u64) -> (DataMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for b in 0..blocks {
        let c = (b % 2) as f64 * 10.0;
        for _ in 0..block {
            rows.push(vec![c + noise.sample(&mut rng), c + noise.sample(&mut rng)]);
            truth.push(b % 2);
        }
    }
    (DataMatrix::from_continuous(&rows).unwrap(), truth)
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut map = std::collections::HashMap::new();
    a.iter().zip(b).all(|(x, y)| *map.entry(*x).or_insert(*y) == *y)
        && map.values().collect::<std::collections::HashSet<_>>().len() == map.len()
}

#[test]
fn initialization_is_seeded_per_restart() {
    let (data, _) = two_block_data(10, 2, 1);
    let cfg = FitConfig::new(2, 1.5, 0.1).with_seed(7);
    let (a0, p0) = initialize(&data, &cfg, 0).unwrap();
    let (b0, q0) = initialize(&data, &cfg, 0).unwrap();
    let (a1, _) = initialize(&data, &cfg, 1).unwrap();
    assert_eq!(a0, b0);
    assert_eq!(p0, q0);
    assert_ne!(a0, a1);
    for row in a0.rows() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}

#[test]
fn map_label_examples() {
    let s = MembershipMatrix::from_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.2, 0.3, 0.5],
    ])
    .unwrap();
    assert_eq!(map_labels(&s), vec![1, 0, 2]);
    let tie = MembershipMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
    assert_eq!(map_labels(&tie), vec![0]);
}

#[test]
fn sweep_without_penalty_solves_rows_independently() {
    let (data, _) = two_block_data(5, 2, 2);
    let ranges = feature_ranges(&data);
    let cfg = FitConfig::new(2, 2.0, 0.0);
    let mut rng = restart_rng(1, 0);
    let s = random_memberships(data.n_rows(), 2, &mut rng);
    let mu = PrototypeSet::from_rows(&[vec![0.0, 0.0], vec![10.0, 10.0]]).unwrap();
    let swept = sweep_memberships(&data, &s, &mu, &cfg, &ranges).unwrap();
    let metric = Metric::new(DistanceMode::Gower, &ranges);
    for t in 0..data.n_rows() {
        let g: Vec<f64> = mu.rows().map(|m| metric.distance(data.row(t), m)).collect();
        let spec = SubproblemSpec {
            distances: &g,
            fuzziness: 2.0,
            jump_penalty: 0.0,
            prev: None,
            next: None,
            warm_start: s.row(t),
        };
        assert_eq!(swept.row(t), solve_subproblem(&spec, 200, 1e-10).as_slice());
    }
}

#[test]
fn single_row_sweep_has_no_penalty() {
    let data = DataMatrix::from_continuous(&[vec![1.0, 2.0]]).unwrap();
    let ranges = feature_ranges(&data);
    let s = MembershipMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
    let mu = PrototypeSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 2.0]]).unwrap();
    let cfg = FitConfig::new(2, 2.0, 100.0).with_distance(DistanceMode::SquaredEuclidean);
    let out = sweep_memberships(&data, &s, &mu, &cfg, &ranges).unwrap();
    // distance zero to the first prototype
    assert!((out.get(0, 0) - 1.0).abs() < 1e-6, "{:?}", out.row(0));
}

#[test]
fn heavy_penalty_flattens_memberships() {
    let (data, _) = two_block_data(10, 2, 3);
    // The exact optimum spreads by O(T^2 / lambda); Gauss-Seidel sweeps need
    // many passes to propagate the coupling along the chain.
    let cfg = FitConfig::new(2, 2.0, 1e5)
        .with_seed(5)
        .with_restarts(2)
        .with_max_outer_iter(5000)
        .with_outer_tol(1e-15);
    let res = fit(&data, &cfg).unwrap();
    let first = res.memberships.row(0).to_vec();
    for row in res.memberships.rows() {
        for (a, b) in row.iter().zip(&first) {
            assert!((a - b).abs() < 1e-3, "{row:?} vs {first:?}");
        }
    }
}

#[test]
fn separable_blocks_are_recovered() {
    let (data, truth) = two_block_data(50, 4, 4);
    let cfg = FitConfig::new(2, 1.25, 0.1).with_seed(11);
    let res = fit(&data, &cfg).unwrap();
    assert!(same_partition(&map_labels(&res.memberships), &truth));
}

#[test]
fn large_fuzziness_gives_uniform_memberships() {
    let (data, _) = two_block_data(50, 2, 5);
    let cfg = FitConfig::new(2, 200.0, 0.0)
        .with_distance(DistanceMode::SquaredEuclidean)
        .with_seed(2);
    let res = fit(&data, &cfg).unwrap();
    assert!(res.memberships.as_slice().iter().all(|&x| (x - 0.5).abs() <= 0.05));
}

#[test]
fn fit_is_deterministic_and_monotone() {
    let (data, _) = two_block_data(20, 3, 6);
    let cfg = FitConfig::new(3, 1.5, 0.3).with_seed(99).with_restarts(4);
    let a = fit(&data, &cfg).unwrap();
    let b = fit(&data, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.restart_objectives.len(), 4);
    let min = a.restart_objectives.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(a.objective, min);
    for w in a.objective_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-6, "{:?}", a.objective_trace);
    }
}

fn max_deviation(a: &MembershipMatrix, b: &MembershipMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn relabeling_initial_states_relabels_output() {
    // Two states: every floating-point sum has two commutative terms, so the
    // permuted run is bit-identical.
    let (data, _) = two_block_data(15, 2, 8);
    let cfg = FitConfig::new(2, 1.5, 0.2).with_seed(1);
    let init = random_memberships(data.n_rows(), 2, &mut restart_rng(42, 0));
    let a = fit_from(&data, &cfg, &init).unwrap();
    let b = fit_from(&data, &cfg, &init.permute_states(&[1, 0])).unwrap();
    assert_eq!(b.memberships, a.memberships.permute_states(&[1, 0]));
    assert_eq!(b.prototypes, a.prototypes.permute_states(&[1, 0]));
    assert_eq!(a.objective, b.objective);

    // Three states without the (nonsmooth) penalty: equal up to solver tolerance.
    let cfg = FitConfig::new(3, 1.5, 0.0)
        .with_seed(1)
        .with_pgd(2000, 0.0)
        .with_outer_tol(1e-15)
        .with_max_outer_iter(500);
    let init = random_memberships(data.n_rows(), 3, &mut restart_rng(42, 1));
    let perm = [2, 0, 1];
    let a = fit_from(&data, &cfg, &init).unwrap();
    let b = fit_from(&data, &cfg, &init.permute_states(&perm)).unwrap();
    let diff = max_deviation(&a.memberships.permute_states(&perm), &b.memberships);
    assert!(diff < 1e-7, "max deviation {diff}");
}

#[test]
fn categorical_prototypes_use_observed_levels() {
    let schema = FeatureSchema::new(vec![
        Feature::continuous("x"),
        Feature::categorical("c", ["lo", "hi"]),
    ])
    .unwrap();
    let rows: Vec<Vec<Value>> = (0..40)
        .map(|t| {
            let hi = (t / 10) % 2 == 1;
            vec![
                Value::Continuous(if hi { 5.0 } else { 0.0 } + (t % 3) as f64 * 0.1),
                Value::Level(usize::from(hi)),
            ]
        })
        .collect();
    let data = DataMatrix::new(schema, rows).unwrap();
    let res = fit(&data, &FitConfig::new(2, 1.1, 0.2).with_seed(3)).unwrap();
    let mut levels: Vec<f64> = res.prototypes.rows().map(|r| r[1]).collect();
    levels.sort_by(f64::total_cmp);
    assert_eq!(levels, vec![0.0, 1.0]);
}

#[test]
fn rejects_invalid_configs() {
    let schema = FeatureSchema::new(vec![Feature::categorical("c", ["a", "b"])]).unwrap();
    let data = DataMatrix::new(schema, vec![vec![Value::Level(0)], vec![Value::Level(1)]]).unwrap();
    let cfg = FitConfig::new(2, 2.0, 0.0).with_distance(DistanceMode::SquaredEuclidean);
    assert!(matches!(fit(&data, &cfg), Err(Error::InvalidConfig(_))));
    assert!(fit(&data, &FitConfig::new(3, 2.0, 0.0)).is_err());
}

proptest! {
    #[test]
    fn weighted_median_attains_brute_force_minimum(
        pairs in prop::collection::vec((-20i32..20, 1u32..10), 1..=7),
    ) {
        let values: Vec<f64> = pairs.iter().map(|p| p.0 as f64 / 2.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1 as f64 / 4.0).collect();
        let cost = |mu: f64| -> f64 {
            values.iter().zip(&weights).map(|(x, w)| w * (x - mu).abs()).sum()
        };
        let best = values.iter().map(|&v| cost(v)).fold(f64::INFINITY, f64::min);
        let med = weighted_median(&values, &weights).unwrap();
        prop_assert!(cost(med) <= best + 1e-12);
        // smallest value reaching half the total weight
        let total: f64 = weights.iter().sum();
        let below: f64 = values.iter().zip(&weights).filter(|(x, _)| **x < med).map(|p| p.1).sum();
        let upto: f64 = values.iter().zip(&weights).filter(|(x, _)| **x <= med).map(|p| p.1).sum();
        prop_assert!(below < total / 2.0 && upto >= total / 2.0);
    }
}
