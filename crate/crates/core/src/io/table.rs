use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataMatrix, Feature, FeatureKind, FeatureSchema};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    #[default]
    Continuous,
    Categorical,
}

/// Whether a column enters the model or is carried along untouched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    #[default]
    Feature,
    Passthrough,
}

/// One entry of a schema file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(default)]
    pub kind: ColumnKind,
    #[serde(default)]
    pub role: ColumnRole,
}

impl ColumnSpec {
    pub fn feature(name: impl Into<String>, kind: ColumnKind) -> Self {
        ColumnSpec { name: name.into(), kind, role: ColumnRole::Feature }
    }

    pub fn passthrough(name: impl Into<String>) -> Self {
        ColumnSpec { name: name.into(), kind: ColumnKind::Continuous, role: ColumnRole::Passthrough }
    }
}

/// Checks that names are unique and at least one column is a feature.
pub fn validate_columns(columns: &[ColumnSpec]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in columns {
        if c.name.is_empty() {
            return Err(Error::InvalidSchema("column names must be non-empty".into()));
        }
        if !seen.insert(c.name.as_str()) {
            return Err(Error::InvalidSchema(format!("duplicate column {:?}", c.name)));
        }
    }
    if !columns.iter().any(|c| c.role == ColumnRole::Feature) {
        return Err(Error::InvalidSchema("schema has no feature columns".into()));
    }
    Ok(())
}

/// Reads a JSON array of [`ColumnSpec`].
pub fn read_schema(path: impl AsRef<Path>) -> Result<Vec<ColumnSpec>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let columns: Vec<ColumnSpec> = serde_json::from_reader(file)?;
    validate_columns(&columns)?;
    Ok(columns)
}

/// A typed feature matrix plus the raw passthrough columns, all sharing the
/// same rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub data: DataMatrix,
    /// `(name, values)` in schema order.
    pub passthrough: Vec<(String, Vec<String>)>,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("nan") || c.eq_ignore_ascii_case("na")
}

/// Reads a CSV whose header contains exactly the schema's column names (in
/// any order). Categorical levels are interned in order of first occurrence.
/// Empty or NaN cells are rejected.
pub fn read_csv(path: impl AsRef<Path>, columns: &[ColumnSpec]) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file, columns)
}

pub fn read_csv_from<R: Read>(input: R, columns: &[ColumnSpec]) -> Result<Table> {
    validate_columns(columns)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let position: HashMap<&str, usize> =
        header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    if position.len() != header.len() {
        return Err(Error::HeaderMismatch("header has duplicate column names".into()));
    }
    for c in columns {
        if !position.contains_key(c.name.as_str()) {
            return Err(Error::HeaderMismatch(format!("column {:?} is not in the file", c.name)));
        }
    }
    if let Some(extra) = header.iter().find(|h| !columns.iter().any(|c| &c.name == *h)) {
        return Err(Error::HeaderMismatch(format!("column {extra:?} is not in the schema")));
    }

    let features: Vec<&ColumnSpec> = columns.iter().filter(|c| c.role == ColumnRole::Feature).collect();
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); features.len()];
    let mut lookup: Vec<HashMap<String, usize>> = vec![HashMap::new(); features.len()];
    let mut cells = Vec::new();
    let mut passthrough: Vec<(String, Vec<String>)> = columns
        .iter()
        .filter(|c| c.role == ColumnRole::Passthrough)
        .map(|c| (c.name.clone(), Vec::new()))
        .collect();

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        for (j, c) in features.iter().enumerate() {
            let cell = record.get(position[c.name.as_str()]).unwrap_or("");
            if is_missing(cell) {
                return Err(Error::MissingValue { row, column: c.name.clone() });
            }
            let value = match c.kind {
                ColumnKind::Continuous => {
                    let x: f64 = cell.parse().map_err(|_| Error::Parse {
                        row,
                        column: c.name.clone(),
                        value: cell.to_string(),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::Parse { row, column: c.name.clone(), value: cell.to_string() });
                    }
                    x
                }
                ColumnKind::Categorical => {
                    let next = levels[j].len();
                    let id = *lookup[j].entry(cell.to_string()).or_insert_with(|| {
                        levels[j].push(cell.to_string());
                        next
                    });
                    id as f64
                }
            };
            cells.push(value);
        }
        for (name, values) in &mut passthrough {
            values.push(record.get(position[name.as_str()]).unwrap_or("").to_string());
        }
    }

    let schema = FeatureSchema::new(
        features
            .iter()
            .zip(levels)
            .map(|(c, lv)| match c.kind {
                ColumnKind::Continuous => Feature::continuous(&c.name),
                ColumnKind::Categorical if lv.is_empty() => Feature::categorical(&c.name, [""]),
                ColumnKind::Categorical => Feature::categorical(&c.name, lv),
            })
            .collect(),
    )?;
    let data = DataMatrix::from_encoded(schema, cells)?;
    Ok(Table { data, passthrough })
}

/// Writes a table back in the layout [`read_csv_from`] accepts: passthrough
/// columns first, then features. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_table<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let schema = table.data.schema();
    let header: Vec<&str> = table
        .passthrough
        .iter()
        .map(|(n, _)| n.as_str())
        .chain(schema.features().iter().map(|f| f.name.as_str()))
        .collect();
    w.write_record(&header)?;
    for t in 0..table.data.n_rows() {
        let mut record: Vec<String> = table.passthrough.iter().map(|(_, v)| v[t].clone()).collect();
        for (p, f) in schema.features().iter().enumerate() {
            let x = table.data.row(t)[p];
            record.push(match &f.kind {
                FeatureKind::Continuous => format_float(x),
                FeatureKind::Categorical { levels } => levels[x as usize].clone(),
            });
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("csv output", e))?;
    Ok(())
}

pub(crate) fn format_float(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<ColumnSpec> {
        vec![
            ColumnSpec::passthrough("date"),
            ColumnSpec::feature("x", ColumnKind::Continuous),
            ColumnSpec::feature("c", ColumnKind::Categorical),
        ]
    }

    #[test]
    fn reads_mixed_file() {
        let text = "date,x,c\nd1,1.5,B\nd2,-2,A\nd3,0.25,B\n";
        let table = read_csv_from(text.as_bytes(), &schema()).unwrap();
        assert_eq!(table.data.n_rows(), 3);
        assert_eq!(table.data.n_features(), 2);
        assert_eq!(table.data.row(1), &[-2.0, 1.0]);
        assert_eq!(
            table.data.schema().feature(1).kind,
            FeatureKind::Categorical { levels: vec!["B".into(), "A".into()] }
        );
        assert_eq!(table.passthrough[0].1, vec!["d1", "d2", "d3"]);
    }

    #[test]
    fn header_order_is_free() {
        let text = "c,x,date\nB,1,d1\n";
        let table = read_csv_from(text.as_bytes(), &schema()).unwrap();
        assert_eq!(table.data.row(0), &[1.0, 0.0]);
    }

    #[test]
    fn rejects_missing_cells_with_location() {
        let text = "date,x,c\nd1,1.5,B\nd2,,A\n";
        match read_csv_from(text.as_bytes(), &schema()) {
            Err(Error::MissingValue { row, column }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "date,x,c\nd1,NaN,B\n";
        assert!(matches!(read_csv_from(text.as_bytes(), &schema()), Err(Error::MissingValue { .. })));
        let text = "date,x,c\nd1,abc,B\n";
        assert!(matches!(read_csv_from(text.as_bytes(), &schema()), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn header_mismatch() {
        let text = "date,x\nd1,1\n";
        assert!(matches!(read_csv_from(text.as_bytes(), &schema()), Err(Error::HeaderMismatch(_))));
        let text = "date,x,c,y\nd1,1,A,2\n";
        assert!(matches!(read_csv_from(text.as_bytes(), &schema()), Err(Error::HeaderMismatch(_))));
    }

    #[test]
    fn schema_validation() {
        assert!(validate_columns(&[ColumnSpec::passthrough("a")]).is_err());
        let dup = [
            ColumnSpec::feature("a", ColumnKind::Continuous),
            ColumnSpec::feature("a", ColumnKind::Categorical),
        ];
        assert!(validate_columns(&dup).is_err());
        let js = r#"[{"name":"a"},{"name":"b","kind":"categorical"},{"name":"d","role":"passthrough"}]"#;
        let cols: Vec<ColumnSpec> = serde_json::from_str(js).unwrap();
        assert_eq!(cols[0].kind, ColumnKind::Continuous);
        assert_eq!(cols[1].kind, ColumnKind::Categorical);
        assert_eq!(cols[2].role, ColumnRole::Passthrough);
    }

    #[test]
    fn round_trip() {
        let text = "date,x,c\nd1,0.1,B\nd2,-2.5e-7,A\nd3,3.141592653589793,B\n";
        let table = read_csv_from(text.as_bytes(), &schema()).unwrap();
        let mut out = Vec::new();
        write_table(&table, &mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), "date,x,c\nd1,0.1,B\nd2,-0.00000025,A\nd3,3.141592653589793,B\n");
        let back = read_csv_from(out.as_slice(), &schema()).unwrap();
        assert_eq!(back, table);
    }

    proptest::proptest! {
        #[test]
        fn write_then_read_is_identity(
            rows in proptest::collection::vec((-1e12f64..1e12, 0usize..4, 0u32..1000), 1..30)
        ) {
            let mut text = String::from("date,x,c\n");
            for (x, c, d) in &rows {
                text.push_str(&format!("d{d},{x:.17e},L{c}\n"));
            }
            let table = read_csv_from(text.as_bytes(), &schema()).unwrap();
            let mut out = Vec::new();
            write_table(&table, &mut out).unwrap();
            let back = read_csv_from(out.as_slice(), &schema()).unwrap();
            proptest::prop_assert_eq!(&back, &table);
            let mut again = Vec::new();
            write_table(&back, &mut again).unwrap();
            proptest::prop_assert_eq!(out, again);
        }
    }
}
