use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::config::{parse_settings, Method, SweepAxis};
use crate::error::{Error, Result};

/// Column order of results files.
pub const RESULT_COLUMNS: [&str; 12] = [
    "run_id",
    "sweep_axis",
    "sweep_value",
    "method",
    "loss",
    "eta",
    "T",
    "n_states",
    "discount",
    "seed",
    "wall_time_ms",
    "error",
];

/// Column order of aggregate files.
pub const AGGREGATE_COLUMNS: [&str; 5] = ["sweep_value", "method", "mean_loss", "stderr", "n"];

/// Outcome of one method on one run. Failed methods carry `error` and no
/// loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub method: Method,
    pub loss: Option<f64>,
    pub eta: f64,
    pub horizon: usize,
    pub n_states: usize,
    pub discount: f64,
    pub seed: u64,
    pub wall_time_ms: Option<u64>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Scientific notation with 17 significant digits; parses back to the same
/// bits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(field: &str, what: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("{what}: cannot parse '{field}'")))
}

fn parse_int<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("{what}: cannot parse '{field}'")))
}

fn record_fields(r: &RunRecord) -> [String; 12] {
    [
        r.run_id.to_string(),
        r.sweep_axis.to_string(),
        format_real(r.sweep_value),
        r.method.to_string(),
        r.loss.map(format_real).unwrap_or_default(),
        format_real(r.eta),
        r.horizon.to_string(),
        r.n_states.to_string(),
        format_real(r.discount),
        r.seed.to_string(),
        r.wall_time_ms.map(|t| t.to_string()).unwrap_or_default(),
        r.error.clone().unwrap_or_default(),
    ]
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(out)
}

/// Writes `# key = value` comment lines.
pub fn write_comments<W: Write>(out: &mut W, settings: &[(&str, String)]) -> Result<()> {
    for (k, v) in settings {
        writeln!(out, "# {k} = {v}")?;
    }
    Ok(())
}

/// Incremental writer for a results file.
pub struct ResultsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ResultsWriter<W> {
    /// Writes the settings echo and column header.
    pub fn new(mut out: W, settings: &[(&str, String)]) -> Result<Self> {
        write_comments(&mut out, settings)?;
        let mut inner = csv_writer(out);
        inner.write_record(RESULT_COLUMNS)?;
        Ok(ResultsWriter { inner })
    }

    pub fn write(&mut self, record: &RunRecord) -> Result<()> {
        self.inner.write_record(record_fields(record))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))
    }
}

/// Writes a complete results file.
pub fn write_results<W: Write>(
    out: W,
    settings: &[(&str, String)],
    records: &[RunRecord],
) -> Result<()> {
    let mut w = ResultsWriter::new(out, settings)?;
    for r in records {
        w.write(r)?;
    }
    w.flush()
}

/// Contents of a results file: the echoed settings and the records.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsFile {
    pub settings: BTreeMap<String, String>,
    pub records: Vec<RunRecord>,
}

fn split_comments<R: BufRead>(input: R) -> Result<(String, String)> {
    let mut comments = String::new();
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        match line.strip_prefix('#') {
            Some(rest) => {
                comments.push_str(rest);
                comments.push('\n');
            }
            None => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    Ok((comments, body))
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "unexpected columns {:?}, expected {expected:?}",
            found.iter().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

pub fn read_results<R: BufRead>(input: R) -> Result<ResultsFile> {
    let (comments, body) = split_comments(input)?;
    let settings = parse_settings(&comments).map_err(|e| Error::Format(e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    check_header(reader.headers()?, &RESULT_COLUMNS)?;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != RESULT_COLUMNS.len() {
            return Err(Error::Format(format!("row has {} fields", row.len())));
        }
        let opt = |i: usize| Some(&row[i]).filter(|f| !f.is_empty());
        records.push(RunRecord {
            run_id: parse_int(&row[0], "run_id")?,
            sweep_axis: row[1]
                .parse()
                .map_err(|e: Error| Error::Format(e.to_string()))?,
            sweep_value: parse_real(&row[2], "sweep_value")?,
            method: row[3]
                .parse()
                .map_err(|e: Error| Error::Format(e.to_string()))?,
            loss: opt(4).map(|f| parse_real(f, "loss")).transpose()?,
            eta: parse_real(&row[5], "eta")?,
            horizon: parse_int(&row[6], "T")?,
            n_states: parse_int(&row[7], "n_states")?,
            discount: parse_real(&row[8], "discount")?,
            seed: parse_int(&row[9], "seed")?,
            wall_time_ms: opt(10).map(|f| parse_int(f, "wall_time_ms")).transpose()?,
            error: opt(11).map(str::to_string),
        });
    }
    Ok(ResultsFile { settings, records })
}

/// Sorts records by `(run_id, method)`.
pub fn sort_canonical(records: &mut [RunRecord]) {
    records.sort_by_key(|r| (r.run_id, r.method));
}

/// Mean loss of one method at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub method: Method,
    pub mean_loss: f64,
    /// Sample standard deviation over `sqrt(n)`; zero when `n == 1`.
    pub stderr: f64,
    pub n: usize,
}

/// Mean and standard error of `xs` (zero error for a single value).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates successful records per `(sweep_axis, sweep_value, method)`,
/// ordered by axis, value and method. Error records are skipped.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    type Group = (SweepAxis, f64, Method, Vec<f64>);
    let mut groups: BTreeMap<(&'static str, u64, Method), Group> = BTreeMap::new();
    for r in records {
        let Some(loss) = r.loss else { continue };
        // Sweep values are non-negative, so their bit patterns sort like the
        // values themselves.
        let key = (r.sweep_axis.name(), r.sweep_value.to_bits(), r.method);
        groups
            .entry(key)
            .or_insert_with(|| (r.sweep_axis, r.sweep_value, r.method, Vec::new()))
            .3
            .push(loss);
    }
    groups
        .into_values()
        .map(|(sweep_axis, sweep_value, method, losses)| {
            let (mean_loss, stderr) = mean_stderr(&losses);
            AggregateRow {
                sweep_axis,
                sweep_value,
                method,
                mean_loss,
                stderr,
                n: losses.len(),
            }
        })
        .collect()
}

/// Writes aggregate rows of a single sweep axis, with the axis echoed as a
/// `# sweep_axis = ...` comment.
pub fn write_aggregate<W: Write>(
    mut out: W,
    axis: Option<SweepAxis>,
    rows: &[AggregateRow],
) -> Result<()> {
    if let Some(axis) = axis {
        write_comments(&mut out, &[("sweep_axis", axis.to_string())])?;
    }
    let mut w = csv_writer(out);
    w.write_record(AGGREGATE_COLUMNS)?;
    for r in rows {
        if axis.is_some_and(|a| a != r.sweep_axis) {
            return Err(Error::Format(format!(
                "aggregate row on axis {} in a file for {axis:?}",
                r.sweep_axis
            )));
        }
        w.write_record([
            format_real(r.sweep_value),
            r.method.to_string(),
            format_real(r.mean_loss),
            format_real(r.stderr),
            r.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate<R: BufRead>(input: R) -> Result<Vec<AggregateRow>> {
    let (comments, body) = split_comments(input)?;
    let settings = parse_settings(&comments).map_err(|e| Error::Format(e.to_string()))?;
    let axis: SweepAxis = settings
        .get("sweep_axis")
        .map(|a| a.parse())
        .transpose()
        .map_err(|e: Error| Error::Format(e.to_string()))?
        .unwrap_or(SweepAxis::Eta);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    check_header(reader.headers()?, &AGGREGATE_COLUMNS)?;
    reader
        .records()
        .map(|row| {
            let row = row?;
            Ok(AggregateRow {
                sweep_axis: axis,
                sweep_value: parse_real(&row[0], "sweep_value")?,
                method: row[1]
                    .parse()
                    .map_err(|e: Error| Error::Format(e.to_string()))?,
                mean_loss: parse_real(&row[2], "mean_loss")?,
                stderr: parse_real(&row[3], "stderr")?,
                n: parse_int(&row[4], "n")?,
            })
        })
        .collect()
}
