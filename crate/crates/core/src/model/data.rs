use crate::error::{Error, Result};

use super::schema::{FeatureKind, FeatureSchema};

/// A single cell of a [`DataMatrix`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Continuous(f64),
    /// Index into the feature's level set.
    Level(usize),
}

/// T x P mixed-type observation matrix.
///
/// Rows are stored row-major as `f64`; categorical cells hold their level
/// index as an exact small integer. This keeps distance evaluation on plain
/// slices while [`DataMatrix::value`] gives the typed view.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    schema: FeatureSchema,
    cells: Vec<f64>,
    n_rows: usize,
}

impl DataMatrix {
    pub fn new(schema: FeatureSchema, rows: Vec<Vec<Value>>) -> Result<Self> {
        let p = schema.len();
        let mut cells = Vec::with_capacity(rows.len() * p);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "data row length",
                    expected: p,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                let feature = schema.feature(j);
                let cell = match (&feature.kind, *v) {
                    (FeatureKind::Continuous, Value::Continuous(x)) if x.is_finite() => x,
                    (FeatureKind::Continuous, Value::Continuous(_)) => {
                        return Err(Error::NonFinite("data matrix"))
                    }
                    (FeatureKind::Categorical { levels }, Value::Level(l)) if l < levels.len() => {
                        l as f64
                    }
                    _ => {
                        return Err(Error::SchemaMismatch(format!(
                            "row {t}, feature {:?}: {v:?} does not match the feature kind",
                            feature.name
                        )))
                    }
                };
                cells.push(cell);
            }
        }
        Self::from_encoded(schema, cells)
    }

    /// All-continuous matrix with features named `x1..xp`.
    pub fn from_continuous(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let schema = FeatureSchema::continuous(p)?;
        let mut cells = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "data row length",
                    expected: p,
                    found: row.len(),
                });
            }
            cells.extend_from_slice(row);
        }
        Self::from_encoded(schema, cells)
    }

    /// Builds a matrix from row-major encoded cells, validating each cell.
    pub fn from_encoded(schema: FeatureSchema, cells: Vec<f64>) -> Result<Self> {
        let p = schema.len();
        if cells.is_empty() || !cells.len().is_multiple_of(p) {
            return Err(Error::InvalidInput(format!(
                "data matrix needs a positive multiple of {p} cells, got {}",
                cells.len()
            )));
        }
        for (i, &c) in cells.iter().enumerate() {
            let feature = schema.feature(i % p);
            match &feature.kind {
                FeatureKind::Continuous if !c.is_finite() => {
                    return Err(Error::NonFinite("data matrix"))
                }
                FeatureKind::Categorical { levels }
                    if !(c >= 0.0 && c.fract() == 0.0 && (c as usize) < levels.len()) =>
                {
                    return Err(Error::SchemaMismatch(format!(
                        "row {}, feature {:?}: invalid level index {c}",
                        i / p,
                        feature.name
                    )))
                }
                _ => {}
            }
        }
        let n_rows = cells.len() / p;
        Ok(DataMatrix {
            schema,
            cells,
            n_rows,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// Number of time points T.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Number of features P.
    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    /// Encoded row `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        let p = self.n_features();
        &self.cells[t * p..(t + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.cells.chunks_exact(self.n_features())
    }

    pub fn column(&self, p: usize) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().skip(p).step_by(self.n_features()).copied()
    }

    pub fn value(&self, t: usize, p: usize) -> Value {
        let c = self.row(t)[p];
        if self.schema.feature(p).is_continuous() {
            Value::Continuous(c)
        } else {
            Value::Level(c as usize)
        }
    }
}
