//! Euclidean projection onto the probability simplex and the per-time-step
//! membership subproblem, solved by projected gradient descent.

use crate::error::{Error, Result};
use crate::model::objective::fuzzy_weight;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Bounds on the diagonal metric, relative to its largest entry.
const METRIC_FLOOR: f64 = 1e-10;
const METRIC_CEIL: f64 = 1e10;
/// Smallest coordinate change worth evaluating in the Euclidean safeguard.
const PLAIN_MIN_SHIFT: f64 = 1e-15;
/// Largest multiple of the scaled Newton step tried.
const MAX_STEP: f64 = 1e8;

/// Projects `v` onto `{p : p >= 0, sum p = 1}` by sort-and-threshold.
pub fn project_to_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidInput("cannot project an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("simplex projection input"));
    }
    let mut out = vec![0.0; v.len()];
    let mut scratch = Vec::with_capacity(v.len());
    project_into(v, &mut out, &mut scratch);
    Ok(out)
}

/// Allocation-free projection; `v` must be finite and non-empty.
pub(crate) fn project_into(v: &[f64], out: &mut [f64], sorted: &mut Vec<f64>) {
    sorted.clear();
    sorted.extend_from_slice(v);
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    let mut total = 0.0;
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - theta).max(0.0);
        total += *o;
    }
    if total > 0.0 {
        out.iter_mut().for_each(|o| *o /= total);
    } else {
        // Only reachable through catastrophic cancellation; fall back to the argmax vertex.
        let best = v
            .iter()
            .enumerate()
            .fold(0, |b, (i, &x)| if x > v[b] { i } else { b });
        out.iter_mut().enumerate().for_each(|(i, o)| *o = f64::from(u8::from(i == best)));
    }
}

/// Projection onto the simplex in the metric `sum_k h_k (p_k - v_k)^2`:
/// `p_k = max(v_k - theta / h_k, 0)` with `theta` found by sorting the
/// breakpoints `h_k v_k`. All `h_k` must be positive.
pub(crate) fn project_weighted_into(
    v: &[f64],
    h: &[f64],
    out: &mut [f64],
    order: &mut Vec<usize>,
) {
    order.clear();
    order.extend(0..v.len());
    order.sort_unstable_by(|&a, &b| (h[b] * v[b]).total_cmp(&(h[a] * v[a])));
    let (mut sum_v, mut sum_inv_h) = (0.0, 0.0);
    let mut theta = f64::NEG_INFINITY;
    for &i in order.iter() {
        sum_v += v[i];
        sum_inv_h += 1.0 / h[i];
        let t = (sum_v - 1.0) / sum_inv_h;
        if h[i] * v[i] > t {
            theta = t;
        }
    }
    let mut total = 0.0;
    for ((o, &x), &hk) in out.iter_mut().zip(v).zip(h) {
        *o = (x - theta / hk).max(0.0);
        total += *o;
    }
    if total > 0.0 && total.is_finite() {
        out.iter_mut().for_each(|o| *o /= total);
    } else {
        let best = order[0];
        out.iter_mut().enumerate().for_each(|(i, o)| *o = f64::from(u8::from(i == best)));
    }
}

/// One membership subproblem: the terms of the objective that involve `s_t`.
#[derive(Clone, Copy, Debug)]
pub struct SubproblemSpec<'a> {
    /// `g(z_t, mu_k)` for every state.
    pub distances: &'a [f64],
    pub fuzziness: f64,
    pub jump_penalty: f64,
    /// Memberships at `t - 1`; absent at the first time point.
    pub prev: Option<&'a [f64]>,
    /// Memberships at `t + 1`; absent at the last time point.
    pub next: Option<&'a [f64]>,
    pub warm_start: &'a [f64],
}

impl SubproblemSpec<'_> {
    fn neighbours(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.prev.into_iter().chain(self.next)
    }

    fn n_neighbours(&self) -> usize {
        usize::from(self.prev.is_some()) + usize::from(self.next.is_some())
    }

    fn penalty_active(&self) -> bool {
        self.jump_penalty > 0.0 && self.n_neighbours() > 0
    }

    /// Curvature estimate used for the initial step `1 / L_hat`.
    fn lipschitz_estimate(&self) -> f64 {
        let m = self.fuzziness;
        let g_max = self.distances.iter().copied().fold(0.0, f64::max);
        let k = self.distances.len() as f64;
        let l = m * (m - 1.0).max(1.0) * g_max
            + 2.0 * self.jump_penalty * k * self.n_neighbours() as f64;
        l.max(1e-12)
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `sum_k s_k^m g_k + lambda * Phi(s)`, where `Phi` sums the squared L1
/// distances to whichever neighbours are present.
pub fn subproblem_value(spec: &SubproblemSpec<'_>, s: &[f64]) -> f64 {
    let fit: f64 = s
        .iter()
        .zip(spec.distances)
        .map(|(&x, &g)| fuzzy_weight(x, spec.fuzziness) * g)
        .sum();
    if spec.jump_penalty == 0.0 {
        return fit;
    }
    let phi: f64 = spec
        .neighbours()
        .map(|n| {
            let d = l1(s, n);
            d * d
        })
        .sum();
    fit + spec.jump_penalty * phi
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Reusable scratch space for [`solve_subproblem`].
#[derive(Debug, Default)]
pub(crate) struct SubproblemSolver {
    grad: Vec<f64>,
    metric: Vec<f64>,
    trial: Vec<f64>,
    candidate: Vec<f64>,
    alternative: Vec<f64>,
    order: Vec<usize>,
    sorted: Vec<f64>,
    free: Vec<usize>,
    face_metric: Vec<f64>,
    scratch: Vec<f64>,
}

impl SubproblemSolver {
    fn gradient(&mut self, spec: &SubproblemSpec<'_>, s: &[f64]) {
        let m = spec.fuzziness;
        self.grad.clear();
        self.grad.extend(s.iter().zip(spec.distances).map(|(&x, &g)| {
            if m == 1.0 {
                g
            } else {
                m * fuzzy_weight(x, m - 1.0) * g
            }
        }));
        if spec.penalty_active() {
            for n in spec.neighbours() {
                let scale = 2.0 * spec.jump_penalty * l1(s, n);
                for ((gr, &x), &y) in self.grad.iter_mut().zip(s).zip(n) {
                    *gr += scale * signum0(x - y);
                }
            }
        }
    }

    /// Diagonal curvature of the subproblem at `s`, clamped to a band
    /// around its largest finite entry (or `l_hat` when all vanish).
    fn curvature(&mut self, spec: &SubproblemSpec<'_>, s: &[f64], l_hat: f64) {
        let m = spec.fuzziness;
        let penalty = 2.0 * spec.jump_penalty * (s.len() * spec.n_neighbours()) as f64;
        self.metric.clear();
        self.metric.extend(s.iter().zip(spec.distances).map(|(&x, &g)| {
            let fit = if m == 1.0 || g == 0.0 {
                0.0
            } else if x > 0.0 {
                m * (m - 1.0) * x.powf(m - 2.0) * g
            } else if m < 2.0 {
                f64::INFINITY
            } else {
                0.0
            };
            fit + penalty
        }));
        let scale = self
            .metric
            .iter()
            .copied()
            .filter(|h| h.is_finite() && *h > 0.0)
            .fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { l_hat };
        let (lo, hi) = (METRIC_FLOOR * scale, METRIC_CEIL * scale);
        self.metric.iter_mut().for_each(|h| *h = h.clamp(lo, hi));
    }

    /// Scaled projected gradient descent with Armijo backtracking, writing the
    /// solution into `out` (which starts from the warm start).
    pub(crate) fn solve_into(
        &mut self,
        spec: &SubproblemSpec<'_>,
        max_iter: usize,
        tol: f64,
        out: &mut [f64],
    ) {
        out.copy_from_slice(spec.warm_start);
        if !spec.penalty_active() && spec.distances.iter().all(|&g| g == 0.0) {
            return;
        }
        let k = out.len();
        self.trial.resize(k, 0.0);
        self.candidate.resize(k, 0.0);
        self.alternative.resize(k, 0.0);

        let l_hat = spec.lipschitz_estimate();
        let mut value = subproblem_value(spec, out);
        let mut start = 1.0;

        for _ in 0..max_iter {
            self.gradient(spec, out);
            self.curvature(spec, out, l_hat);
            let mut eta = start;
            let mut accepted = None;
            for halving in 0..MAX_HALVINGS {
                let cand_value = self.step(spec, out, eta, false);
                let slope = self.slope(spec, out, false);
                if slope >= 0.0 {
                    break;
                }
                if cand_value <= value && cand_value <= value + ARMIJO * slope {
                    accepted = Some(cand_value);
                    let mut grow = halving == 0;
                    if eta > 1.0 {
                        let half_value = self.step(spec, out, 0.5 * eta, true);
                        if half_value < cand_value {
                            std::mem::swap(&mut self.candidate, &mut self.alternative);
                            accepted = Some(half_value);
                            eta *= 0.5;
                            grow = false;
                        }
                    }
                    start = if grow { (2.0 * eta).min(MAX_STEP) } else { eta.max(1.0) };
                    break;
                }
                eta *= 0.5;
            }
            if k > 2 && spec.penalty_active() {
                let bound = accepted.unwrap_or(value);
                if accepted.is_none() {
                    self.step(spec, out, start, false);
                }
                if let Some(snapped) = self.snap_to_kinks(spec, out, start, bound) {
                    std::mem::swap(&mut self.candidate, &mut self.alternative);
                    accepted = Some(snapped);
                }
            }
            let decrease = accepted.map_or(0.0, |v: f64| value - v);
            let moved = accepted.is_some() && self.candidate.as_slice() != &*out;
            if moved && decrease > tol * value.abs() {
                out.copy_from_slice(&self.candidate);
                value -= decrease;
                continue;
            }
            // The scaled step has stalled: confirm with a Euclidean step.
            match self.plain_search(spec, out, value, l_hat) {
                Some(plain_value) if plain_value < value - decrease => {
                    out.copy_from_slice(&self.alternative);
                    let progress = value - plain_value > tol * value.abs();
                    value = plain_value;
                    start = 1.0;
                    if progress {
                        continue;
                    }
                }
                _ if moved => out.copy_from_slice(&self.candidate),
                _ => {}
            }
            break;
        }
    }

    /// Projected scaled step of length `eta` from `x`, written to the
    /// candidate (or alternative) buffer. Returns its value.
    fn step(&mut self, spec: &SubproblemSpec<'_>, x: &[f64], eta: f64, alternative: bool) -> f64 {
        for (((tr, &xk), &g), &h) in self.trial.iter_mut().zip(x).zip(&self.grad).zip(&self.metric) {
            *tr = xk - eta * g / h;
        }
        let dst = if alternative { &mut self.alternative } else { &mut self.candidate };
        project_weighted_into(&self.trial, &self.metric, dst, &mut self.order);
        subproblem_value(spec, dst)
    }

    /// Pins every coordinate whose step from `x` to the candidate crossed (or
    /// started on) a neighbour's value at that value, and takes the scaled
    /// step over the remaining coordinates, backtracking from `eta` until
    /// the value drops below `bound`. Writes to the alternative buffer.
    fn snap_to_kinks(
        &mut self,
        spec: &SubproblemSpec<'_>,
        x: &[f64],
        eta: f64,
        bound: f64,
    ) -> Option<f64> {
        self.free.clear();
        let mut pinned_mass = 0.0;
        for (i, (&xi, &ci)) in x.iter().zip(&self.candidate).enumerate() {
            let pin = [spec.prev, spec.next]
                .into_iter()
                .flatten()
                .map(|nb| nb[i])
                .filter(|&kink| xi == kink || (xi - kink) * (ci - kink) < 0.0)
                .min_by(|a, b| (a - ci).abs().total_cmp(&(b - ci).abs()));
            match pin {
                Some(kink) => {
                    self.alternative[i] = kink;
                    pinned_mass += kink;
                }
                None => self.free.push(i),
            }
        }
        let rest = 1.0 - pinned_mass;
        if self.free.len() == x.len() || self.free.is_empty() || !(rest > 0.0) {
            return None;
        }
        // Projection onto {sum = rest} is the unit-simplex projection of
        // v / rest in the metric h * rest.
        self.face_metric.clear();
        self.face_metric.extend(self.free.iter().map(|&i| self.metric[i] * rest));
        let mut projected = std::mem::take(&mut self.scratch);
        projected.resize(self.free.len(), 0.0);
        let mut eta = eta;
        let mut found = None;
        for _ in 0..MAX_HALVINGS {
            self.trial.clear();
            for &i in &self.free {
                self.trial.push((x[i] - eta * self.grad[i] / self.metric[i]) / rest);
            }
            project_weighted_into(&self.trial, &self.face_metric, &mut projected, &mut self.order);
            for (&i, &p) in self.free.iter().zip(&projected) {
                self.alternative[i] = p * rest;
            }
            if self.slope(spec, x, true) >= 0.0 {
                break;
            }
            let v = subproblem_value(spec, &self.alternative);
            if v < bound {
                found = Some(v);
                break;
            }
            eta *= 0.5;
        }
        self.scratch = projected;
        self.trial.resize(x.len(), 0.0);
        found
    }

    /// Euclidean projected gradient search from step `1 / l_hat` with
    /// Armijo backtracking, written to the alternative buffer. Gives up once
    /// the step no longer moves the point.
    fn plain_search(&mut self, spec: &SubproblemSpec<'_>, x: &[f64], value: f64, l_hat: f64) -> Option<f64> {
        let mut eta = 1.0 / l_hat;
        for _ in 0..MAX_HALVINGS {
            for ((tr, &xk), &g) in self.trial.iter_mut().zip(x).zip(&self.grad) {
                *tr = xk - eta * g;
            }
            project_into(&self.trial, &mut self.alternative, &mut self.sorted);
            let shift = self.alternative.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if shift <= PLAIN_MIN_SHIFT {
                return None;
            }
            let slope = self.slope(spec, x, true);
            if slope >= 0.0 {
                return None;
            }
            let cand_value = subproblem_value(spec, &self.alternative);
            if cand_value < value && cand_value <= value + ARMIJO * slope {
                return Some(cand_value);
            }
            eta *= 0.5;
        }
        None
    }

    /// Directional derivative at `x` towards the candidate (or alternative)
    /// point. Coordinates sitting exactly on a neighbour's value contribute
    /// the one-sided slope of their absolute-value term.
    fn slope(&self, spec: &SubproblemSpec<'_>, x: &[f64], alternative: bool) -> f64 {
        let c = if alternative { &self.alternative } else { &self.candidate };
        let mut slope: f64 = self.grad.iter().zip(c.iter().zip(x)).map(|(g, (c, x))| g * (c - x)).sum();
        if spec.jump_penalty > 0.0 {
            for nb in [spec.prev, spec.next].into_iter().flatten() {
                let l1: f64 = x.iter().zip(nb).map(|(a, b)| (a - b).abs()).sum();
                let kinked: f64 = x
                    .iter()
                    .zip(nb)
                    .zip(c.iter())
                    .filter(|((a, b), _)| a == b)
                    .map(|((a, _), ci)| (ci - a).abs())
                    .sum();
                slope += 2.0 * spec.jump_penalty * l1 * kinked;
            }
        }
        slope
    }
}

/// Minimizes [`subproblem_value`] over the simplex starting from the warm
/// start. The returned point never has a larger value than the warm start.
pub fn solve_subproblem(spec: &SubproblemSpec<'_>, max_iter: usize, tol: f64) -> Vec<f64> {
    let mut out = vec![0.0; spec.warm_start.len()];
    SubproblemSolver::default().solve_into(spec, max_iter, tol, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec<'a>(g: &'a [f64], m: f64, lambda: f64, warm: &'a [f64]) -> SubproblemSpec<'a> {
        SubproblemSpec {
            distances: g,
            fuzziness: m,
            jump_penalty: lambda,
            prev: None,
            next: None,
            warm_start: warm,
        }
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn projection_examples() {
        let p = project_to_simplex(&[0.2, 0.3, 0.5]).unwrap();
        assert!(max_abs_diff(&p, &[0.2, 0.3, 0.5]) < 1e-15);
        assert_eq!(project_to_simplex(&[0.6, 0.6]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(project_to_simplex(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(project_to_simplex(&[f64::NAN, 1.0]).is_err());
        assert!(project_to_simplex(&[]).is_err());
    }

    #[test]
    fn projection_matches_grid_search_on_two_simplex() {
        // brute-force QP over a fine grid for v = (2, 0)
        let v = [2.0, 0.0];
        let n = 10_000;
        let best = (0..=n)
            .map(|i| {
                let a = i as f64 / n as f64;
                let d = (a - v[0]).powi(2) + (1.0 - a - v[1]).powi(2);
                (d, a)
            })
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .unwrap()
            .1;
        let p = project_to_simplex(&v).unwrap();
        assert!((p[0] - best).abs() < 1e-4);
    }

    #[test]
    fn value_boundary_forms() {
        let g = [0.3, 0.9];
        let s = [0.4, 0.6];
        let both = SubproblemSpec {
            prev: Some(&s),
            next: Some(&s),
            ..spec(&g, 2.0, 3.0, &s)
        };
        let fit = 0.16 * 0.3 + 0.36 * 0.9;
        assert!((subproblem_value(&both, &s) - fit).abs() < 1e-15);

        let zeros = [0.0, 0.0];
        let last = SubproblemSpec {
            prev: Some(&[0.0, 1.0]),
            ..spec(&zeros, 3.3, 1.0, &zeros)
        };
        assert_eq!(subproblem_value(&last, &[1.0, 0.0]), 4.0);

        let half = [0.5, 0.5];
        let first = SubproblemSpec {
            next: Some(&half),
            ..spec(&zeros, 2.0, 1.0, &half)
        };
        assert_eq!(subproblem_value(&first, &half), 0.0);
    }

    #[test]
    fn symmetric_problem_gives_uniform() {
        let s = solve_subproblem(&spec(&[1.0, 1.0], 2.0, 0.0, &[0.9, 0.1]), 200, 1e-12);
        assert!(max_abs_diff(&s, &[0.5, 0.5]) < 1e-6);
    }

    #[test]
    fn lagrangian_solution_for_m_two() {
        // s_k proportional to 1/g_k: (1, 1/4) / 1.25; grid search agrees to 1e-4
        let g = [1.0, 4.0];
        let grid = (0..=10_000)
            .map(|i| i as f64 / 10_000.0)
            .min_by(|a, b| {
                let f = |x: f64| x * x * g[0] + (1.0 - x) * (1.0 - x) * g[1];
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert!((grid - 0.8).abs() < 1e-4);
        let s = solve_subproblem(&spec(&g, 2.0, 0.0, &[0.5, 0.5]), 200, 1e-14);
        assert!(max_abs_diff(&s, &[0.8, 0.2]) < 1e-6);
    }

    #[test]
    fn penalty_dominated_limit() {
        let prev = [0.3, 0.7];
        let sp = SubproblemSpec {
            prev: Some(&prev),
            ..spec(&[1.0, 4.0], 2.0, 1e6, &[0.5, 0.5])
        };
        let s = solve_subproblem(&sp, 200, 1e-10);
        assert!(max_abs_diff(&s, &prev) < 1e-3, "{s:?}");
    }

    #[test]
    fn zero_distances_without_neighbours_keep_warm_start() {
        let warm = [0.2, 0.5, 0.3];
        let s = solve_subproblem(&spec(&[0.0; 3], 1.5, 1.0, &warm), 200, 1e-10);
        assert_eq!(s, warm);
    }

    #[test]
    fn hard_limit_moves_to_vertex() {
        let s = solve_subproblem(&spec(&[0.2, 0.7, 0.5], 1.0, 0.0, &[0.3, 0.3, 0.4]), 200, 1e-12);
        assert!(max_abs_diff(&s, &[1.0, 0.0, 0.0]) < 1e-12, "{s:?}");
    }

    fn simplex_point(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01..1.0f64, k).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn projection_idempotent_and_equivariant(
            v in prop::collection::vec(-3.0..3.0f64, 1..7),
            seed in any::<u64>(),
        ) {
            let p = project_to_simplex(&v).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            let pp = project_to_simplex(&p).unwrap();
            prop_assert!(max_abs_diff(&p, &pp) < 1e-12);

            let mut perm: Vec<usize> = (0..v.len()).collect();
            let mut state = seed;
            for i in (1..perm.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (state >> 33) as usize % (i + 1));
            }
            let vp: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
            let pv = project_to_simplex(&vp).unwrap();
            let expected: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
            prop_assert!(max_abs_diff(&pv, &expected) < 1e-12);
        }

        #[test]
        fn solver_never_increases_value(
            g in prop::collection::vec(0.0..3.0f64, 3),
            m in 1.0..3.0f64,
            lambda in 0.0..2.0f64,
            warm in simplex_point(3),
            prev in simplex_point(3),
            next in simplex_point(3),
        ) {
            let sp = SubproblemSpec {
                distances: &g,
                fuzziness: m,
                jump_penalty: lambda,
                prev: Some(&prev),
                next: Some(&next),
                warm_start: &warm,
            };
            let s = solve_subproblem(&sp, 200, 1e-10);
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(subproblem_value(&sp, &s) <= subproblem_value(&sp, &warm));
        }

        #[test]
        fn lambda_zero_matches_stationarity(
            g in prop::collection::vec(0.05..3.0f64, 2..6),
            m in 1.05..4.0f64,
            warm in simplex_point(5),
        ) {
            let k = g.len();
            let warm = project_to_simplex(&warm[..k]).unwrap();
            let s = solve_subproblem(&spec(&g, m, 0.0, &warm), 200, 1e-14);
            let raw: Vec<f64> = g.iter().map(|x| x.powf(-1.0 / (m - 1.0))).collect();
            let z: f64 = raw.iter().sum();
            let expected: Vec<f64> = raw.iter().map(|x| x / z).collect();
            prop_assert!(max_abs_diff(&s, &expected) < 1e-6, "{:?} vs {:?}", s, expected);
        }

        #[test]
        fn weighted_projection_satisfies_kkt(
            v in prop::collection::vec(-3.0..3.0f64, 1..7),
            h in prop::collection::vec(0.01..100.0f64, 7),
        ) {
            let h = &h[..v.len()];
            let mut p = vec![0.0; v.len()];
            project_weighted_into(&v, h, &mut p, &mut Vec::new());
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // multiplier h_k (v_k - p_k) is shared by the support and bounds the rest
            let support: Vec<f64> = (0..v.len())
                .filter(|&i| p[i] > 0.0)
                .map(|i| h[i] * (v[i] - p[i]))
                .collect();
            let theta = support[0];
            let scale = 1.0 + theta.abs();
            prop_assert!(support.iter().all(|t| (t - theta).abs() < 1e-9 * scale));
            for i in (0..v.len()).filter(|&i| p[i] == 0.0) {
                prop_assert!(h[i] * v[i] <= theta + 1e-9 * scale);
            }
        }
    }
}
