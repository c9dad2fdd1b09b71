use crate::error::{Error, Result};

use super::data::{DataMatrix, Value};

const SUM_TOL: f64 = 1e-9;
const NEG_TOL: f64 = -1e-12;

/// T x K row-stochastic matrix of state probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipMatrix {
    cells: Vec<f64>,
    n_states: usize,
}

impl MembershipMatrix {
    /// Validates row-major cells. Entries in `[-1e-12, 0)` are clamped to
    /// zero and the row renormalized; rows must otherwise sum to one within
    /// `1e-9`.
    pub fn new(n_states: usize, mut cells: Vec<f64>) -> Result<Self> {
        if n_states == 0 || cells.is_empty() || !cells.len().is_multiple_of(n_states) {
            return Err(Error::InvalidInput(format!(
                "membership matrix needs a positive multiple of {n_states} cells, got {}",
                cells.len()
            )));
        }
        for (t, row) in cells.chunks_exact_mut(n_states).enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("membership matrix"));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&x| x < NEG_TOL) || (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::NotOnSimplex { row: t, sum });
            }
            if row.iter().any(|&x| x < 0.0) {
                row.iter_mut().for_each(|x| *x = x.max(0.0));
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        Ok(MembershipMatrix { cells, n_states })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput("ragged membership rows".into()));
        }
        Self::new(k, rows.concat())
    }

    pub fn uniform(n_rows: usize, n_states: usize) -> Self {
        MembershipMatrix {
            cells: vec![1.0 / n_states as f64; n_rows * n_states],
            n_states,
        }
    }

    /// Skips validation; the caller guarantees every row lies on the simplex.
    pub(crate) fn from_cells_unchecked(n_states: usize, cells: Vec<f64>) -> Self {
        MembershipMatrix { cells, n_states }
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len() / self.n_states
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.cells[t * self.n_states..(t + 1) * self.n_states]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.cells.chunks_exact(self.n_states)
    }

    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.cells[t * self.n_states + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.cells
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Reorders state columns: column `k` of the result is column `perm[k]`
    /// of `self`.
    pub fn permute_states(&self, perm: &[usize]) -> Self {
        let k = self.n_states;
        let mut cells = Vec::with_capacity(self.cells.len());
        for row in self.rows() {
            cells.extend(perm.iter().map(|&j| row[j]));
        }
        debug_assert_eq!(perm.len(), k);
        MembershipMatrix {
            cells,
            n_states: k,
        }
    }
}

/// K x P state prototypes, encoded like [`DataMatrix`] rows.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeSet {
    cells: Vec<f64>,
    n_features: usize,
}

impl PrototypeSet {
    pub fn new(n_features: usize, cells: Vec<f64>) -> Result<Self> {
        if n_features == 0 || cells.is_empty() || !cells.len().is_multiple_of(n_features) {
            return Err(Error::InvalidInput(format!(
                "prototype set needs a positive multiple of {n_features} cells, got {}",
                cells.len()
            )));
        }
        if cells.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("prototypes"));
        }
        Ok(PrototypeSet { cells, n_features })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput("ragged prototype rows".into()));
        }
        Self::new(p, rows.concat())
    }

    pub fn n_states(&self) -> usize {
        self.cells.len() / self.n_features
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.cells[k * self.n_features..(k + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.cells.chunks_exact(self.n_features)
    }

    /// Typed view of prototype entry `(k, p)` under the data's schema.
    pub fn value(&self, data: &DataMatrix, k: usize, p: usize) -> Value {
        let c = self.row(k)[p];
        if data.schema().feature(p).is_continuous() {
            Value::Continuous(c)
        } else {
            Value::Level(c as usize)
        }
    }

    pub fn permute_states(&self, perm: &[usize]) -> Self {
        let cells = perm.iter().flat_map(|&j| self.row(j).to_vec()).collect();
        PrototypeSet {
            cells,
            n_features: self.n_features,
        }
    }
}
