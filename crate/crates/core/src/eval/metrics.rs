use crate::error::{Error, Result};
use crate::model::MembershipMatrix;

/// Largest state count accepted by exhaustive permutation alignment.
pub const MAX_ALIGN_STATES: usize = 8;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

fn check_states(k: usize) -> Result<()> {
    if k > MAX_ALIGN_STATES {
        return Err(Error::TooManyStates(k));
    }
    Ok(())
}

/// Mean squared difference between `estimate` and `truth` after the column
/// permutation of `estimate` that minimizes it. Returns the MSE and the
/// permutation `sigma`, meaning estimated column `sigma[k]` is matched to
/// true column `k`.
pub fn align_and_mse(
    estimate: &MembershipMatrix,
    truth: &MembershipMatrix,
) -> Result<(f64, Vec<usize>)> {
    if estimate.n_rows() != truth.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "estimated vs true rows",
            expected: truth.n_rows(),
            found: estimate.n_rows(),
        });
    }
    if estimate.n_states() != truth.n_states() {
        return Err(Error::DimensionMismatch {
            context: "estimated vs true states",
            expected: truth.n_states(),
            found: estimate.n_states(),
        });
    }
    let k = truth.n_states();
    check_states(k)?;
    // cross[a][b] = sum_t (est[t, a] - true[t, b])^2
    let mut cross = vec![vec![0.0; k]; k];
    for (e, s) in estimate.rows().zip(truth.rows()) {
        for (a, row) in cross.iter_mut().enumerate() {
            for (b, c) in row.iter_mut().enumerate() {
                let d = e[a] - s[b];
                *c += d * d;
            }
        }
    }
    let n = (truth.n_rows() * k) as f64;
    let mut best = (f64::INFINITY, Vec::new());
    for perm in permutations(k) {
        let total: f64 = perm.iter().enumerate().map(|(b, &a)| cross[a][b]).sum();
        if total < best.0 {
            best = (total, perm);
        }
    }
    Ok((best.0 / n, best.1))
}

fn choose2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    let ids = labels.iter().map(|l| seen.binary_search(l).unwrap()).collect();
    (ids, seen.len())
}

/// Pair-counting adjusted Rand index between two labelings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "label vectors",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("ARI needs at least two labels".into()));
    }
    let (a, na) = dense_ids(a);
    let (b, nb) = dense_ids(b);
    let mut table = vec![0usize; na * nb];
    for (&i, &j) in a.iter().zip(&b) {
        table[i * nb + j] += 1;
    }
    let index: f64 = table.iter().map(|&n| choose2(n)).sum();
    let rows: f64 = table.chunks(nb).map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..nb)
        .map(|j| choose2((0..na).map(|i| table[i * nb + j]).sum()))
        .sum();
    let expected = rows * cols / choose2(a.len());
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn class_count(truth: &[usize], pred: &[usize]) -> Result<usize> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            context: "truth vs predicted labels",
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("no labels".into()));
    }
    Ok(truth.iter().chain(pred).max().unwrap() + 1)
}

fn recall_mean(truth: &[usize], pred: impl Iterator<Item = usize>, n: usize) -> Result<f64> {
    let mut hits = vec![0usize; n];
    let mut totals = vec![0usize; n];
    for (&t, p) in truth.iter().zip(pred) {
        totals[t] += 1;
        hits[t] += usize::from(t == p);
    }
    if let Some(c) = totals.iter().position(|&n| n == 0) {
        return Err(Error::AbsentClass(c));
    }
    Ok(hits.iter().zip(&totals).map(|(&h, &n)| h as f64 / n as f64).sum::<f64>() / n as f64)
}

/// Mean per-class recall of `pred` against `truth`, taken as given. Classes
/// are `0..=max label`; each must occur in `truth`.
pub fn balanced_accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let n = class_count(truth, pred)?;
    recall_mean(truth, pred.iter().copied(), n)
}

/// Balanced accuracy after relabeling `pred` by the permutation that
/// maximizes it. Returns the score and the permutation (`pred` label `j`
/// becomes `perm[j]`).
pub fn aligned_balanced_accuracy(truth: &[usize], pred: &[usize]) -> Result<(f64, Vec<usize>)> {
    let n = class_count(truth, pred)?;
    check_states(n)?;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for perm in permutations(n) {
        let score = recall_mean(truth, pred.iter().map(|&p| perm[p]), n)?;
        if score > best.0 {
            best = (score, perm);
        }
    }
    Ok(best)
}
