//! Readers and writers for the CSV and JSON formats used by the CLI.
//!
//! Coordinates are pixels in image convention (x right, y down). Floats are
//! written in their shortest exact decimal form, so a write-read round trip
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use anigrowth_core::hypothesis::TestReport;
use anigrowth_core::sim::FiveNumber;
use anigrowth_core::{EstimateRow, EstimateTable, GrowthParams, MatchedPair, MinutiaPattern, StudyDataset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] anigrowth_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn line_of(err: &csv::Error) -> u64 {
    err.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_error(line: u64, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

/// Deserializes every data row of a headed CSV, tagged with its 1-based line.
fn records<T: serde::de::DeserializeOwned, R: Read>(reader: R) -> Result<Vec<(u64, T)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_error(line_of(&e), e.to_string()))?.clone();
    let mut out = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {
                let line = row.position().map(|p| p.line()).unwrap_or(0);
                let value = row
                    .deserialize(Some(&headers))
                    .map_err(|e| parse_error(line, e.to_string()))?;
                out.push((line, value));
            }
            Err(e) => return Err(parse_error(line_of(&e), e.to_string())),
        }
    }
    Ok(out)
}

/// One matched minutia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub finger_id: u32,
    pub impression_id: u32,
    pub minutia_id: u32,
    pub x_ref: f64,
    pub y_ref: f64,
    pub x_query: f64,
    pub y_query: f64,
}

/// Reads the matched-pairs CSV. Minutiae of a pair are ordered by
/// `minutia_id`; patterns are left uncentered.
pub fn read_study<R: Read>(reader: R) -> Result<StudyDataset> {
    let mut groups: BTreeMap<(u32, u32), BTreeMap<u32, PairRecord>> = BTreeMap::new();
    for (line, rec) in records::<PairRecord, _>(reader)? {
        let coords = [rec.x_ref, rec.y_ref, rec.x_query, rec.y_query];
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(parse_error(line, "coordinates must be finite"));
        }
        let group = groups.entry((rec.finger_id, rec.impression_id)).or_default();
        if group.insert(rec.minutia_id, rec).is_some() {
            return Err(parse_error(
                line,
                format!(
                    "duplicate minutia {} for finger {} impression {}",
                    rec.minutia_id, rec.finger_id, rec.impression_id
                ),
            ));
        }
    }
    let mut study = StudyDataset::new();
    for ((p, k), rows) in groups {
        let template: Vec<(f64, f64)> = rows.values().map(|r| (r.x_ref, r.y_ref)).collect();
        let query: Vec<(f64, f64)> = rows.values().map(|r| (r.x_query, r.y_query)).collect();
        study.insert(MatchedPair::new(
            MinutiaPattern::from_xy(&template, p, 0)?,
            MinutiaPattern::from_xy(&query, p, k)?,
        )?)?;
    }
    Ok(study)
}

pub fn load_study(path: &Path) -> Result<StudyDataset> {
    read_study(open(path)?)
}

pub fn write_study<W: Write>(study: &StudyDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for pair in study.pairs() {
        let (p, k) = (pair.finger_id(), pair.impression_id());
        for (j, (z, q)) in pair.template.points().iter().zip(pair.query.points()).enumerate() {
            w.serialize(PairRecord {
                finger_id: p,
                impression_id: k,
                minutia_id: j as u32 + 1,
                x_ref: z.re,
                y_ref: z.im,
                x_query: q.re,
                y_query: q.im,
            })?;
        }
    }
    if study.is_empty() {
        w.write_record([
            "finger_id",
            "impression_id",
            "minutia_id",
            "x_ref",
            "y_ref",
            "x_query",
            "y_query",
        ])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_study(study: &StudyDataset, path: &Path) -> Result<()> {
    write_study(study, create(path)?)
}

/// A row of the estimate CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub finger_id: u32,
    pub impression_id: u32,
    pub gamma_hat: f64,
    pub beta_hat: f64,
    pub tau_hat: f64,
    pub lambda_hat: f64,
    pub n: usize,
    pub iterations: usize,
    #[serde(rename = "final_F")]
    pub final_f: f64,
}

impl From<&EstimateRow> for EstimateRecord {
    fn from(r: &EstimateRow) -> Self {
        Self {
            finger_id: r.finger_id,
            impression_id: r.impression_id,
            gamma_hat: r.params.gamma,
            beta_hat: r.params.beta,
            tau_hat: r.params.tau,
            lambda_hat: r.params.lambda,
            n: r.n,
            iterations: r.iterations,
            final_f: r.objective,
        }
    }
}

const ESTIMATE_HEADER: [&str; 9] = [
    "finger_id",
    "impression_id",
    "gamma_hat",
    "beta_hat",
    "tau_hat",
    "lambda_hat",
    "n",
    "iterations",
    "final_F",
];

pub fn write_estimates<W: Write>(table: &EstimateTable, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(ESTIMATE_HEADER)?;
    for row in table.rows() {
        w.serialize(EstimateRecord::from(row))?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_estimates(table: &EstimateTable, path: &Path) -> Result<()> {
    write_estimates(table, create(path)?)
}

pub fn read_estimates<R: Read>(reader: R) -> Result<EstimateTable> {
    let mut table = EstimateTable::new();
    for (line, r) in records::<EstimateRecord, _>(reader)? {
        let params = GrowthParams::new(r.gamma_hat, r.beta_hat, r.tau_hat, r.lambda_hat)
            .map_err(|e| parse_error(line, e.to_string()))?;
        table
            .insert(EstimateRow {
                finger_id: r.finger_id,
                impression_id: r.impression_id,
                params,
                n: r.n,
                iterations: r.iterations,
                objective: r.final_f,
            })
            .map_err(|e| parse_error(line, e.to_string()))?;
    }
    Ok(table)
}

pub fn load_estimates(path: &Path) -> Result<EstimateTable> {
    read_estimates(open(path)?)
}

/// Reads a reference sample of rates: either an estimate CSV (column
/// `tau_hat`) or a single-column CSV with header `tau`.
pub fn load_tau_sample(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = rdr.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h == "tau_hat" || h == "tau")
        .ok_or_else(|| IoError::Format(format!("{}: no 'tau' or 'tau_hat' column", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let v: f64 = rec
            .get(col)
            .unwrap_or("")
            .parse()
            .map_err(|_| parse_error(line, "rate is not a number"))?;
        if !v.is_finite() {
            return Err(parse_error(line, "rate must be finite"));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn write_tau_sample<W: Write>(taus: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["tau"])?;
    for t in taus {
        w.write_record([t.to_string()])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

/// `bin_center,count` rows of a rose diagram.
pub fn write_rose<W: Write>(bins: &[(f64, usize)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bin_center", "count"])?;
    for (center, count) in bins {
        w.write_record([center.to_string(), count.to_string()])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

/// Five-number summaries, one row per named series:
/// `series,min,q1,median,q3,max`.
pub fn write_boxplots<W: Write>(series: &[(&str, FiveNumber)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["series", "min", "q1", "median", "q3", "max"])?;
    for (name, f) in series {
        w.write_record([
            name.to_string(),
            f.min.to_string(),
            f.q1.to_string(),
            f.median.to_string(),
            f.q3.to_string(),
            f.max.to_string(),
        ])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

/// Cell written when no rate on the grid led to a rejection.
pub const ABOVE_GRID: &str = "above-grid";

/// `gamma,tau_min` rows; `None` becomes [`ABOVE_GRID`].
pub fn write_sweep<W: Write>(points: &[(f64, Option<f64>)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["gamma", "tau_min"])?;
    for (gamma, tau) in points {
        let cell = tau.map_or_else(|| ABOVE_GRID.to_string(), |t| t.to_string());
        w.write_record([gamma.to_string(), cell])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

pub fn read_sweep<R: Read>(reader: R) -> Result<Vec<(f64, Option<f64>)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let gamma: f64 = rec[0].parse().map_err(|_| parse_error(line, "bad gamma"))?;
        let tau = match &rec[1] {
            ABOVE_GRID => None,
            s => Some(s.parse().map_err(|_| parse_error(line, "bad tau_min"))?),
        };
        out.push((gamma, tau));
    }
    Ok(out)
}

/// Flattens a report into one CSV row; config entries become
/// `config.<key>` columns.
pub fn write_report_csv<W: Write>(report: &TestReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut header = vec![
        "test_id".to_string(),
        "statistic".into(),
        "threshold".into(),
        "p_value".into(),
        "decision".into(),
        "alpha".into(),
        "epsilon".into(),
        "seed".into(),
    ];
    let mut row = vec![
        report.test_id.to_string(),
        report.statistic.to_string(),
        report.threshold.to_string(),
        opt(report.p_value),
        if report.rejects() { "reject" } else { "retain" }.to_string(),
        report.alpha.to_string(),
        opt(report.epsilon),
        report.seed.map(|s| s.to_string()).unwrap_or_default(),
    ];
    for (k, v) in &report.config {
        header.push(format!("config.{k}"));
        row.push(v.to_string());
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush().map_err(|source| IoError::File {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

/// Pretty JSON of a report. Non-finite statistics (a degenerate bootstrap)
/// become `null`.
pub fn report_json(report: &TestReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}
