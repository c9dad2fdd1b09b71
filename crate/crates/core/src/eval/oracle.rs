use crate::error::{Error, Result};
use crate::model::{DataMatrix, MembershipMatrix};

/// Output of [`fuzzy_cmeans_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct CmeansResult {
    pub memberships: MembershipMatrix,
    /// K x P centroids.
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn centroids(data: &DataMatrix, s: &MembershipMatrix, m: f64) -> Vec<Vec<f64>> {
    let p = data.n_features();
    (0..s.n_states())
        .map(|k| {
            let mut num = vec![0.0; p];
            let mut den = 0.0;
            for (t, row) in data.rows().enumerate() {
                let w = s.get(t, k).powf(m);
                den += w;
                num.iter_mut().zip(row).for_each(|(n, x)| *n += w * x);
            }
            num.iter().map(|n| n / den).collect()
        })
        .collect()
}

fn memberships(data: &DataMatrix, mu: &[Vec<f64>], m: f64) -> Vec<f64> {
    let k = mu.len();
    let mut out = Vec::with_capacity(data.n_rows() * k);
    for row in data.rows() {
        let d2: Vec<f64> = mu
            .iter()
            .map(|c| row.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum())
            .collect();
        let zeros = d2.iter().filter(|&&d| d == 0.0).count();
        if zeros > 0 {
            let share = 1.0 / zeros as f64;
            out.extend(d2.iter().map(|&d| if d == 0.0 { share } else { 0.0 }));
        } else {
            let w: Vec<f64> = d2.iter().map(|d| d.powf(-1.0 / (m - 1.0))).collect();
            let z: f64 = w.iter().sum();
            out.extend(w.iter().map(|x| x / z));
        }
    }
    out
}

/// Classical fuzzy c-means: alternates the weighted-mean centroid update
/// and the closed-form membership update, starting from `init`, until the
/// largest membership change is below `tol` or `max_iter` rounds have run.
/// A point that coincides with centroids is shared equally among them.
pub fn fuzzy_cmeans_oracle(
    data: &DataMatrix,
    m: f64,
    init: &MembershipMatrix,
    max_iter: usize,
    tol: f64,
) -> Result<CmeansResult> {
    if !(m > 1.0) {
        return Err(Error::InvalidConfig(format!("fuzzy c-means needs m > 1, got {m}")));
    }
    if !data.schema().all_continuous() {
        return Err(Error::SchemaMismatch("fuzzy c-means needs continuous features".into()));
    }
    if init.n_rows() != data.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "initial memberships vs data rows",
            expected: data.n_rows(),
            found: init.n_rows(),
        });
    }
    let mut s = init.clone();
    let mut mu = centroids(data, &s, m);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let next = memberships(data, &mu, m);
        let change = next
            .iter()
            .zip(s.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        s = MembershipMatrix::new(s.n_states(), next)?;
        mu = centroids(data, &s, m);
        if change < tol {
            break;
        }
    }
    Ok(CmeansResult { memberships: s, centroids: mu, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let data = DataMatrix::from_continuous(&[vec![1.0], vec![0.0], vec![3.0]]).unwrap();
        let s = memberships(&data, &[vec![0.0], vec![2.0]], 2.0);
        // point 1 is equidistant; point 0 sits on the first centroid
        assert_eq!(&s[0..2], &[0.5, 0.5]);
        assert_eq!(&s[2..4], &[1.0, 0.0]);
        // squared distances 9 and 1
        assert!((s[4] - 0.1).abs() < 1e-15 && (s[5] - 0.9).abs() < 1e-15);

        let data = DataMatrix::from_continuous(&[vec![0.0, 0.0]]).unwrap();
        let s = memberships(&data, &[vec![1.0, 0.0], vec![0.0, 2.0]], 2.0);
        assert!((s[0] - 0.8).abs() < 1e-15 && (s[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn converges_on_two_clusters() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![if i < 10 { 0.0 } else { 5.0 } + 0.01 * i as f64]).collect();
        let data = DataMatrix::from_continuous(&rows).unwrap();
        let init_rows: Vec<Vec<f64>> = (0..20).map(|i| if i % 2 == 0 { vec![0.7, 0.3] } else { vec![0.4, 0.6] }).collect();
        let init = MembershipMatrix::from_rows(&init_rows).unwrap();
        let res = fuzzy_cmeans_oracle(&data, 2.0, &init, 500, 1e-12).unwrap();
        assert!(res.iterations < 500);
        let first = res.memberships.get(0, 0) > 0.5;
        for t in 0..20 {
            assert_eq!(res.memberships.get(t, 0) > 0.5, first == (t < 10));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let data = DataMatrix::from_continuous(&[vec![0.0], vec![1.0]]).unwrap();
        let init = MembershipMatrix::uniform(2, 2);
        assert!(fuzzy_cmeans_oracle(&data, 1.0, &init, 10, 1e-9).is_err());
        assert!(fuzzy_cmeans_oracle(&data, 2.0, &MembershipMatrix::uniform(3, 2), 10, 1e-9).is_err());
    }
}
