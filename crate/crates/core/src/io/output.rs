use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};
use crate::fit::{map_labels, FitResult};
use crate::model::{DataMatrix, FitConfig, MembershipMatrix, Value};
use crate::simulate::SimulatedSeries;

use super::table::format_float;

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("csv output", e))
}

/// Columns `t, s_1..s_K, map_label`; `t` and labels are 1-based.
pub fn write_memberships<W: Write>(s: &MembershipMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = s.n_states();
    let mut header = vec!["t".to_string()];
    header.extend((1..=k).map(|i| format!("s_{i}")));
    header.push("map_label".into());
    w.write_record(&header)?;
    for (t, (row, label)) in s.rows().zip(map_labels(s)).enumerate() {
        let mut record = vec![(t + 1).to_string()];
        record.extend(row.iter().map(|&x| format_float(x)));
        record.push((label + 1).to_string());
        w.write_record(&record)?;
    }
    flush(w)
}

/// `{"state_1": {"feature": value, ...}, ...}`; categorical prototypes are
/// written as their level names.
pub fn prototypes_json(result: &FitResult, data: &DataMatrix) -> Json {
    let schema = data.schema();
    let mut states = Map::new();
    for k in 0..result.prototypes.n_states() {
        let mut entry = Map::new();
        for (p, f) in schema.features().iter().enumerate() {
            let v = match result.prototypes.value(data, k, p) {
                Value::Continuous(x) => Json::from(x),
                Value::Level(l) => match &f.kind {
                    crate::model::FeatureKind::Categorical { levels } => Json::from(levels[l].clone()),
                    crate::model::FeatureKind::Continuous => Json::from(l),
                },
            };
            entry.insert(f.name.clone(), v);
        }
        states.insert(format!("state_{}", k + 1), Json::Object(entry));
    }
    Json::Object(states)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitMetrics<'a> {
    pub n_rows: usize,
    pub n_features: usize,
    pub config: &'a FitConfig,
    pub objective: f64,
    pub objective_trace: &'a [f64],
    pub restart_objectives: &'a [f64],
    pub best_restart: usize,
    pub iterations_used: usize,
    pub rescued_states: usize,
    /// Number of rows per MAP state, in state order.
    pub state_counts: Vec<usize>,
}

impl<'a> FitMetrics<'a> {
    pub fn new(result: &'a FitResult, data: &DataMatrix, config: &'a FitConfig) -> Self {
        let mut state_counts = vec![0; result.memberships.n_states()];
        for l in map_labels(&result.memberships) {
            state_counts[l] += 1;
        }
        FitMetrics {
            n_rows: data.n_rows(),
            n_features: data.n_features(),
            config,
            objective: result.objective,
            objective_trace: &result.objective_trace,
            restart_objectives: &result.restart_objectives,
            best_restart: result.best_restart,
            iterations_used: result.iterations_used,
            rescued_states: result.rescued_states,
            state_counts,
        }
    }
}

/// Columns `y_1..y_P, pi_1..pi_K, label` with 1-based labels.
pub fn write_simulated<W: Write>(series: &SimulatedSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let p = series.y.first().map_or(0, Vec::len);
    let k = series.pi_true.n_states();
    let header: Vec<String> = (1..=p)
        .map(|i| format!("y_{i}"))
        .chain((1..=k).map(|i| format!("pi_{i}")))
        .chain(std::iter::once("label".to_string()))
        .collect();
    w.write_record(&header)?;
    for ((y, pi), label) in series.y.iter().zip(series.pi_true.rows()).zip(&series.component_labels) {
        let record: Vec<String> = y
            .iter()
            .chain(pi)
            .map(|&x| format_float(x))
            .chain(std::iter::once((label + 1).to_string()))
            .collect();
        w.write_record(&record)?;
    }
    flush(w)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n").map_err(|e| Error::io(path, e))
}

pub fn create_file(path: impl AsRef<Path>) -> Result<File> {
    let path = path.as_ref();
    File::create(path).map_err(|e| Error::io(path, e))
}

/// State information recovered from a memberships, simulation or labels CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StateColumns {
    /// From columns `s_1..s_K` or `pi_1..pi_K`.
    pub probabilities: Option<MembershipMatrix>,
    /// 0-based labels from a `map_label`, `label` or `state` column, or the
    /// single column of a one-column file. Falls back to the row-wise argmax
    /// of the probabilities.
    pub labels: Option<Vec<usize>>,
}

fn indexed_columns(header: &[String], prefix: &str) -> Option<Vec<usize>> {
    let mut cols = Vec::new();
    for k in 1.. {
        match header.iter().position(|h| *h == format!("{prefix}{k}")) {
            Some(i) => cols.push(i),
            None => break,
        }
    }
    (!cols.is_empty()).then_some(cols)
}

pub fn read_state_columns(path: impl AsRef<Path>) -> Result<StateColumns> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_state_columns_from(file)
}

pub fn read_state_columns_from<R: Read>(input: R) -> Result<StateColumns> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let prob_cols = indexed_columns(&header, "s_").or_else(|| indexed_columns(&header, "pi_"));
    let label_col = ["map_label", "label", "state"]
        .iter()
        .find_map(|name| header.iter().position(|h| h == name))
        .or_else(|| (header.len() == 1 && prob_cols.is_none()).then_some(0));
    if prob_cols.is_none() && label_col.is_none() {
        return Err(Error::HeaderMismatch(
            "expected s_1.., pi_1.. probability columns or a label column".into(),
        ));
    }

    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let field = |c: usize| -> Result<&str> {
            match record.get(c) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(Error::MissingValue { row, column: header[c].clone() }),
            }
        };
        if let Some(cols) = &prob_cols {
            for &c in cols {
                let v = field(c)?;
                let x: f64 = v.parse().map_err(|_| Error::Parse {
                    row,
                    column: header[c].clone(),
                    value: v.to_string(),
                })?;
                cells.push(x);
            }
        }
        if let Some(c) = label_col {
            let v = field(c)?;
            let l: usize = v.parse().map_err(|_| Error::Parse {
                row,
                column: header[c].clone(),
                value: v.to_string(),
            })?;
            labels.push(l);
        }
    }
    let probabilities = match &prob_cols {
        Some(cols) => Some(MembershipMatrix::new(cols.len(), cells)?),
        None => None,
    };
    let labels = match (label_col, &probabilities) {
        (Some(_), _) => Some(dense_labels(&labels)),
        (None, Some(s)) => Some(map_labels(s)),
        (None, None) => None,
    };
    Ok(StateColumns { probabilities, labels })
}

/// Maps arbitrary label ids onto `0..n` by increasing value.
pub fn dense_labels(labels: &[usize]) -> Vec<usize> {
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    labels.iter().map(|l| ids.binary_search(l).expect("present")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit;

    #[test]
    fn memberships_layout_and_read_back() {
        let s = MembershipMatrix::from_rows(&[vec![0.25, 0.75], vec![1.0, 0.0]]).unwrap();
        let mut out = Vec::new();
        write_memberships(&s, &mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert_eq!(text, "t,s_1,s_2,map_label\n1,0.25,0.75,2\n2,1,0,1\n");
        let back = read_state_columns_from(out.as_slice()).unwrap();
        assert_eq!(back.probabilities.unwrap(), s);
        assert_eq!(back.labels.unwrap(), vec![1, 0]);
    }

    #[test]
    fn labels_only_files() {
        let back = read_state_columns_from("label\n3\n1\n3\n".as_bytes()).unwrap();
        assert!(back.probabilities.is_none());
        assert_eq!(back.labels.unwrap(), vec![1, 0, 1]);
        let back = read_state_columns_from("regime\n2\n1\n".as_bytes()).unwrap();
        assert_eq!(back.labels.unwrap(), vec![1, 0]);
        assert!(read_state_columns_from("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_state_columns_from("label\nx\n".as_bytes()).is_err());
    }

    #[test]
    fn prototypes_use_level_names() {
        use crate::model::{Feature, FeatureSchema};
        let schema = FeatureSchema::new(vec![Feature::continuous("x"), Feature::categorical("c", ["lo", "hi"])]).unwrap();
        let rows = [[0.0, 0.0], [0.1, 0.0], [5.0, 1.0], [5.1, 1.0]];
        let data = DataMatrix::from_encoded(schema, rows.concat()).unwrap();
        let cfg = FitConfig::new(2, 1.5, 0.0).with_restarts(2);
        let res = fit(&data, &cfg).unwrap();
        let js = prototypes_json(&res, &data);
        let obj = js.as_object().unwrap();
        assert_eq!(obj.len(), 2);
        let levels: Vec<&str> = obj.values().map(|v| v["c"].as_str().unwrap()).collect();
        assert!(levels.contains(&"lo") && levels.contains(&"hi"));
        let metrics = serde_json::to_value(FitMetrics::new(&res, &data, &cfg)).unwrap();
        assert_eq!(metrics["state_counts"].as_array().unwrap().len(), 2);
        assert_eq!(metrics["config"]["n_states"], 2);
    }
}
