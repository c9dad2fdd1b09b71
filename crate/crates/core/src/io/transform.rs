use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::table::format_float;

/// `r_t = ln(p_t) - ln(p_{t-1})`; one value shorter than the input.
pub fn log_return(prices: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = prices.iter().position(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "log return needs positive prices, got {} at index {i}",
            prices[i]
        )));
    }
    Ok(prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
}

/// Trailing-window sample standard deviation. The first `window - 1`
/// positions have no full window and are dropped.
pub fn rolling_std(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 2 {
        return Err(Error::InvalidConfig(format!("rolling window must be at least 2, got {window}")));
    }
    if window > x.len() {
        return Err(Error::InvalidInput(format!(
            "rolling window {window} exceeds series length {}",
            x.len()
        )));
    }
    Ok(x.windows(window)
        .map(|w| {
            let mean = w.iter().sum::<f64>() / window as f64;
            let ss: f64 = w.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (window - 1) as f64).sqrt()
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

impl Sign {
    pub fn name(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
            Sign::Zero => "zero",
        }
    }
}

/// Sign of consecutive differences; one value shorter than the input.
pub fn sign_diff(x: &[f64]) -> Vec<Sign> {
    x.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > 0.0 {
                Sign::Plus
            } else if d < 0.0 {
                Sign::Minus
            } else {
                Sign::Zero
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

/// Interior local extrema as `(index, value)`. Runs of equal values are
/// collapsed to their first index; a run counts when it is strictly below
/// (or above) both neighbouring runs.
pub fn find_extrema(x: &[f64], which: Extremum) -> Vec<(usize, f64)> {
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for (i, &v) in x.iter().enumerate() {
        if runs.last().is_none_or(|r| r.1 != v) {
            runs.push((i, v));
        }
    }
    runs.windows(3)
        .filter(|w| match which {
            Extremum::Min => w[1].1 < w[0].1 && w[1].1 < w[2].1,
            Extremum::Max => w[1].1 > w[0].1 && w[1].1 > w[2].1,
        })
        .map(|w| w[1])
        .collect()
}

/// For each position, the value of the nearest local extremum (ties go to
/// the earlier one). Without interior extrema every position gets the global
/// minimum or maximum.
pub fn local_extrema(x: &[f64], which: Extremum) -> Vec<f64> {
    let extrema = find_extrema(x, which);
    if extrema.is_empty() {
        let fallback = match which {
            Extremum::Min => x.iter().copied().fold(f64::INFINITY, f64::min),
            Extremum::Max => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        return vec![fallback; x.len()];
    }
    let mut j = 0;
    (0..x.len())
        .map(|t| {
            while j + 1 < extrema.len() && extrema[j + 1].0 <= t {
                j += 1;
            }
            let here = extrema[j];
            match extrema.get(j + 1) {
                Some(&next) if here.0 < t && next.0 - t < t - here.0 => next.1,
                _ => here.1,
            }
        })
        .collect()
}

/// `(M + Omega + omega) - (Mbar + Omegabar + omegabar)` reduced into `[0, 2 pi)`.
pub fn relative_phase(
    mean_anomaly: &[f64],
    node: &[f64],
    perihelion: &[f64],
    planet_mean_anomaly: &[f64],
    planet_node: &[f64],
    planet_perihelion: &[f64],
) -> Result<Vec<f64>> {
    let n = mean_anomaly.len();
    for s in [node, perihelion, planet_mean_anomaly, planet_node, planet_perihelion] {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                context: "relative phase inputs",
                expected: n,
                found: s.len(),
            });
        }
    }
    Ok((0..n)
        .map(|t| {
            let d = (mean_anomaly[t] + node[t] + perihelion[t])
                - (planet_mean_anomaly[t] + planet_node[t] + planet_perihelion[t]);
            let r = d.rem_euclid(TAU);
            if r >= TAU {
                0.0
            } else {
                r
            }
        })
        .collect())
}

/// One derived column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    LogReturn { source: String, output: String },
    RollingStd { source: String, window: usize, output: String },
    SignDiff { source: String, output: String },
    LocalExtrema { source: String, which: Extremum, output: String },
    /// Sources in the order `M, Omega, omega, Mbar, Omegabar, omegabar`.
    RelativePhase { sources: Vec<String>, output: String },
}

impl TransformSpec {
    pub fn output(&self) -> &str {
        match self {
            TransformSpec::LogReturn { output, .. }
            | TransformSpec::RollingStd { output, .. }
            | TransformSpec::SignDiff { output, .. }
            | TransformSpec::LocalExtrema { output, .. }
            | TransformSpec::RelativePhase { output, .. } => output,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TransformSpec::RollingStd { window, .. } if *window < 2 => Err(Error::InvalidConfig(
                format!("rolling_std window must be at least 2, got {window}"),
            )),
            TransformSpec::RelativePhase { sources, .. } if sources.len() != 6 => Err(Error::InvalidConfig(
                format!("relative_phase needs 6 sources, got {}", sources.len()),
            )),
            _ => Ok(()),
        }
    }
}

/// A transform pipeline: input columns copied through unchanged, followed by
/// derived columns computed in order (later transforms may use earlier
/// outputs).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pipeline {
    #[serde(default)]
    pub keep: Vec<String>,
    pub transforms: Vec<TransformSpec>,
}

impl Pipeline {
    /// Accepts either `{"keep": [...], "transforms": [...]}` or a bare array
    /// of transforms.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Form {
            Full(Pipeline),
            Bare(Vec<TransformSpec>),
        }
        let pipeline = match serde_json::from_str::<Form>(text) {
            Ok(Form::Full(p)) => p,
            Ok(Form::Bare(transforms)) => Pipeline { keep: Vec::new(), transforms },
            Err(_) => {
                // Re-parse as the full form for a specific error message.
                serde_json::from_str::<Pipeline>(text)?
            }
        };
        pipeline.validate()?;
        Ok(pipeline)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names: Vec<&str> = self.keep.iter().map(String::as_str).collect();
        for t in &self.transforms {
            t.validate()?;
            names.push(t.output());
        }
        let mut sorted = names.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!("output column {:?} appears twice", w[0])));
        }
        if names.is_empty() {
            return Err(Error::InvalidConfig("pipeline produces no columns".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Cells {
    Raw(Vec<String>),
    Numeric(Vec<f64>),
    Signs(Vec<Sign>),
}

/// A column whose first value belongs to input row `offset`.
#[derive(Clone, Debug)]
struct Column {
    offset: usize,
    cells: Cells,
}

impl Column {
    fn len(&self) -> usize {
        match &self.cells {
            Cells::Raw(v) => v.len(),
            Cells::Numeric(v) => v.len(),
            Cells::Signs(v) => v.len(),
        }
    }

    fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        match &self.cells {
            Cells::Numeric(v) => Ok(v.clone()),
            Cells::Raw(v) => v
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let row = self.offset + i + 1;
                    if s.trim().is_empty() {
                        return Err(Error::MissingValue { row, column: name.to_string() });
                    }
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::Parse { row, column: name.to_string(), value: s.clone() })
                })
                .collect(),
            Cells::Signs(_) => Err(Error::SchemaMismatch(format!("column {name:?} is categorical"))),
        }
    }

    fn render(&self, i: usize) -> String {
        match &self.cells {
            Cells::Raw(v) => v[i].clone(),
            Cells::Numeric(v) => format_float(v[i]),
            Cells::Signs(v) => v[i].name().to_string(),
        }
    }
}

/// Result of running a [`Pipeline`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransformOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Leading input rows dropped so every column is defined.
    pub dropped_rows: usize,
    pub warnings: Vec<String>,
}

impl TransformOutput {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io("transform output", e))
    }
}

/// Runs `pipeline` on a CSV with a header row. Rows lost to differencing or
/// rolling windows are dropped from the head of every output column, so the
/// result stays rectangular and row-aligned.
pub fn run_pipeline<R: Read>(input: R, pipeline: &Pipeline) -> Result<TransformOutput> {
    pipeline.validate()?;
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record?;
        for (c, v) in raw.iter_mut().enumerate() {
            v.push(record.get(c).unwrap_or("").to_string());
        }
    }
    let n_rows = raw.first().map_or(0, Vec::len);
    let mut columns: HashMap<String, Column> = header
        .iter()
        .cloned()
        .zip(raw)
        .map(|(h, v)| (h, Column { offset: 0, cells: Cells::Raw(v) }))
        .collect();

    let get = |columns: &HashMap<String, Column>, name: &str| -> Result<Column> {
        columns
            .get(name)
            .cloned()
            .ok_or_else(|| Error::HeaderMismatch(format!("column {name:?} not found")))
    };

    let mut warnings = Vec::new();
    for t in &pipeline.transforms {
        let column = match t {
            TransformSpec::LogReturn { source, .. } => {
                let c = get(&columns, source)?;
                let x = c.numeric(source)?;
                Column { offset: c.offset + 1, cells: Cells::Numeric(log_return(&x)?) }
            }
            TransformSpec::RollingStd { source, window, .. } => {
                let c = get(&columns, source)?;
                let x = c.numeric(source)?;
                Column { offset: c.offset + window - 1, cells: Cells::Numeric(rolling_std(&x, *window)?) }
            }
            TransformSpec::SignDiff { source, output } => {
                let c = get(&columns, source)?;
                let x = c.numeric(source)?;
                if x.len() < 2 {
                    return Err(Error::InvalidInput(format!("sign_diff on {source:?} needs at least 2 values")));
                }
                let signs = sign_diff(&x);
                let zeros = signs.iter().filter(|&&s| s == Sign::Zero).count();
                if zeros > 0 {
                    warnings.push(format!(
                        "{output}: {zeros} zero difference(s) encoded as level \"zero\""
                    ));
                }
                Column { offset: c.offset + 1, cells: Cells::Signs(signs) }
            }
            TransformSpec::LocalExtrema { source, which, .. } => {
                let c = get(&columns, source)?;
                let x = c.numeric(source)?;
                if x.len() < 3 {
                    return Err(Error::InvalidInput(format!("local_extrema on {source:?} needs at least 3 values")));
                }
                Column { offset: c.offset, cells: Cells::Numeric(local_extrema(&x, *which)) }
            }
            TransformSpec::RelativePhase { sources, .. } => {
                let cols = sources.iter().map(|s| get(&columns, s)).collect::<Result<Vec<_>>>()?;
                let offset = cols.iter().map(|c| c.offset).max().unwrap_or(0);
                let series = cols
                    .iter()
                    .zip(sources)
                    .map(|(c, s)| Ok(c.numeric(s)?[offset - c.offset..].to_vec()))
                    .collect::<Result<Vec<_>>>()?;
                let theta = relative_phase(&series[0], &series[1], &series[2], &series[3], &series[4], &series[5])?;
                Column { offset, cells: Cells::Numeric(theta) }
            }
        };
        columns.insert(t.output().to_string(), column);
    }

    let names: Vec<String> = pipeline
        .keep
        .iter()
        .cloned()
        .chain(pipeline.transforms.iter().map(|t| t.output().to_string()))
        .collect();
    let selected = names.iter().map(|n| get(&columns, n)).collect::<Result<Vec<_>>>()?;
    let dropped_rows = selected.iter().map(|c| c.offset).max().unwrap_or(0).min(n_rows);
    let n_out = n_rows - dropped_rows;
    let rows = (0..n_out)
        .map(|i| {
            selected
                .iter()
                .map(|c| {
                    let j = dropped_rows + i - c.offset;
                    debug_assert!(j < c.len());
                    c.render(j)
                })
                .collect()
        })
        .collect();
    Ok(TransformOutput { header: names, rows, dropped_rows, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn log_return_examples() {
        assert_eq!(log_return(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        let r = log_return(&[100.0, 110.0]).unwrap();
        assert!((r[0] - 0.09531017980432493).abs() < 1e-15);
        assert!(log_return(&[7.0]).unwrap().is_empty());
        assert!(log_return(&[1.0, 0.0]).is_err());
        assert!(log_return(&[1.0, -3.0]).is_err());
    }

    #[test]
    fn rolling_std_examples() {
        assert_eq!(rolling_std(&[2.0; 5], 3).unwrap(), vec![0.0; 3]);
        let r = rolling_std(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|v| (v - 0.5f64.sqrt()).abs() < 1e-15));
        // full window: sample sd of 1..4 is sqrt(5/3)
        let full = rolling_std(&[1.0, 2.0, 3.0, 4.0], 4).unwrap();
        assert!((full[0] - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(rolling_std(&[1.0, 2.0], 3).is_err());
        assert!(rolling_std(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn sign_diff_examples() {
        assert_eq!(sign_diff(&[1.0, 2.0, 5.0]), vec![Sign::Plus, Sign::Plus]);
        assert_eq!(sign_diff(&[1.0, 1.0]), vec![Sign::Zero]);
        assert_eq!(sign_diff(&[3.0, 1.0, 2.0]), vec![Sign::Minus, Sign::Plus]);
    }

    #[test]
    fn local_extrema_examples() {
        assert_eq!(local_extrema(&[1.0, 2.0, 3.0], Extremum::Max), vec![3.0; 3]);
        assert_eq!(local_extrema(&[1.0, 2.0, 3.0], Extremum::Min), vec![1.0; 3]);
        assert_eq!(local_extrema(&[0.0, 2.0, 0.0, 2.0, 0.0], Extremum::Max), vec![2.0; 5]);
        assert_eq!(local_extrema(&[5.0, 1.0, 5.0], Extremum::Min), vec![1.0; 3]);
        // maxima 3 at index 1 and 7 at index 4; index 2 is nearer 1, 3 nearer 4
        let x = [0.0, 3.0, 1.0, 2.0, 7.0, 0.0];
        assert_eq!(find_extrema(&x, Extremum::Max), vec![(1, 3.0), (4, 7.0)]);
        assert_eq!(local_extrema(&x, Extremum::Max), vec![3.0, 3.0, 3.0, 7.0, 7.0, 7.0]);
        // equidistant position goes to the earlier extremum
        let x = [0.0, 3.0, 1.0, 7.0, 0.0];
        assert_eq!(local_extrema(&x, Extremum::Max), vec![3.0, 3.0, 3.0, 7.0, 7.0]);
        // plateau collapses to its first index
        let x = [3.0, 1.0, 1.0, 1.0, 3.0];
        assert_eq!(find_extrema(&x, Extremum::Min), vec![(1, 1.0)]);
        // plateau touching the boundary is not interior
        assert!(find_extrema(&[1.0, 1.0, 3.0], Extremum::Min).is_empty());
    }

    #[test]
    fn relative_phase_examples() {
        let z = [0.0];
        assert_eq!(relative_phase(&z, &z, &z, &z, &z, &z).unwrap(), vec![0.0]);
        let a = [1.0, 2.0];
        let b = [0.5, 4.0];
        let c = [3.0, 6.0];
        assert_eq!(relative_phase(&a, &b, &c, &a, &b, &c).unwrap(), vec![0.0, 0.0]);
        let r = relative_phase(&[0.0], &[0.0], &[0.0], &[PI / 2.0], &[0.0], &[0.0]).unwrap();
        assert!((r[0] - 1.5 * PI).abs() < 1e-15);
        let r = relative_phase(&[-1e-18], &[0.0], &[0.0], &[0.0], &[0.0], &[0.0]).unwrap();
        assert!(r[0] >= 0.0 && r[0] < TAU);
        assert!(relative_phase(&a, &a, &a, &a, &a, &[0.0]).is_err());
    }

    #[test]
    fn pipeline_trims_uniformly() {
        let csv = "date,price,w\nd1,100,1\nd2,110,3\nd3,99,2\nd4,120,2\nd5,130,5\n";
        let p = Pipeline::from_json(
            r#"{"keep":["date"],"transforms":[
                {"op":"log_return","source":"price","output":"r"},
                {"op":"rolling_std","source":"r","window":3,"output":"vol"},
                {"op":"sign_diff","source":"w","output":"dw"}]}"#,
        )
        .unwrap();
        let out = run_pipeline(csv.as_bytes(), &p).unwrap();
        assert_eq!(out.header, vec!["date", "r", "vol", "dw"]);
        assert_eq!(out.dropped_rows, 3);
        assert_eq!(out.rows.len(), 2);
        assert_eq!(out.rows[0][0], "d4");
        let r: f64 = out.rows[0][1].parse().unwrap();
        assert!((r - (120.0f64 / 99.0).ln()).abs() < 1e-15);
        let returns = log_return(&[100.0, 110.0, 99.0, 120.0]).unwrap();
        let vol: f64 = out.rows[0][2].parse().unwrap();
        assert_eq!(vol, rolling_std(&returns, 3).unwrap()[0]);
        assert_eq!(out.rows[0][3], "zero");
        assert_eq!(out.rows[1][3], "plus");
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn pipeline_bare_array_and_errors() {
        let p = Pipeline::from_json(r#"[{"op":"local_extrema","source":"x","which":"min","output":"lo"}]"#).unwrap();
        assert!(p.keep.is_empty());
        let out = run_pipeline("x\n5\n1\n5\n".as_bytes(), &p).unwrap();
        assert_eq!(out.rows, vec![vec!["1"], vec!["1"], vec!["1"]]);
        assert!(run_pipeline("y\n5\n1\n5\n".as_bytes(), &p).is_err());
        assert!(run_pipeline("x\n5\nfoo\n5\n".as_bytes(), &p).is_err());
        assert!(Pipeline::from_json(r#"[{"op":"rolling_std","source":"x","window":1,"output":"v"}]"#).is_err());
        assert!(Pipeline::from_json(r#"[{"op":"nope","source":"x","output":"v"}]"#).is_err());
        assert!(Pipeline::from_json(r#"{"keep":["x"],"transforms":[{"op":"log_return","source":"x","output":"x"}]}"#).is_err());
    }

    #[test]
    fn pipeline_relative_phase_aligns_offsets() {
        let csv = "a,b,c,d,e,f\n0,0,0,0,0,0\n1,0,0,0,0,0\n3,0,0,0,0,0\n";
        let p = Pipeline::from_json(
            r#"[{"op":"log_return","source":"b","output":"lb"},
                {"op":"relative_phase","sources":["a","lb","c","d","e","f"],"output":"theta"}]"#,
        );
        // log return of zeros is invalid
        assert!(run_pipeline(csv.as_bytes(), &p.unwrap()).is_err());
        let csv = "a,b,c,d,e,f\n0,1,0,0,0,0\n1,1,0,0,0,0\n3,1,0,0,0,0\n";
        let p = Pipeline::from_json(
            r#"[{"op":"log_return","source":"b","output":"lb"},
                {"op":"relative_phase","sources":["a","lb","c","d","e","f"],"output":"theta"}]"#,
        )
        .unwrap();
        let out = run_pipeline(csv.as_bytes(), &p).unwrap();
        assert_eq!(out.dropped_rows, 1);
        assert_eq!(out.rows, vec![vec!["0", "1"], vec!["0", "3"]]);
    }
}
