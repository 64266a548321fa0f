//! CSV input and output.
//!
//! Schemas (exact headers):
//!
//! | file            | header                                                                   |
//! |-----------------|--------------------------------------------------------------------------|
//! | OE / BDM        | `respondent_id,stated_wtp`                                               |
//! | DC              | `respondent_id,price_cue,accept` (accept is `0` or `1`)                  |
//! | demand curve    | `price,share`                                                            |
//! | study           | `grid_set,levels,procedure,mode,metric,true_value,estimate,ci_lower,ci_upper` |
//!
//! Numbers are written with the shortest representation that reads back to
//! the same `f64`, so export followed by import is lossless.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_grid, validate_sample, DcDataset, DcRecord, DemandCurve, Elicitation, WtpSample,
};
use crate::study::{DcMeanMode, StudyResult};

pub const WTP_HEADER: [&str; 2] = ["respondent_id", "stated_wtp"];
pub const DC_HEADER: [&str; 3] = ["respondent_id", "price_cue", "accept"];
pub const CURVE_HEADER: [&str; 2] = ["price", "share"];
pub const STUDY_HEADER: [&str; 9] = [
    "grid_set",
    "levels",
    "procedure",
    "mode",
    "metric",
    "true_value",
    "estimate",
    "ci_lower",
    "ci_upper",
];

/// A DC price grid given either as an evenly spaced range or as explicit levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range { min: f64, max: f64, step: f64 },
    Levels(Vec<f64>),
}

impl GridSpec {
    pub fn levels(&self) -> Result<Vec<f64>> {
        let levels = match self {
            GridSpec::Levels(v) => v.clone(),
            GridSpec::Range { min, max, step } => {
                if !(min.is_finite() && max.is_finite() && step.is_finite())
                    || max <= min
                    || *step <= 0.0
                {
                    return Err(Error::InvalidConfig(
                        "grid range needs finite min < max and a positive step".into(),
                    ));
                }
                let count = (max - min) / step;
                let n = count.round();
                if (count - n).abs() > 1e-9 * count.max(1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "step {step} does not divide the range [{min}, {max}]"
                    )));
                }
                let n = n as usize;
                (0..=n)
                    .map(|i| if i == n { *max } else { min + i as f64 * step })
                    .collect()
            }
        };
        validate_grid(&levels)?;
        Ok(levels)
    }
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?.clone();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::SchemaMismatch {
            line: Some(1),
            message: format!(
                "expected header '{}', found '{}'",
                expected.join(","),
                found.join(",")
            ),
        });
    }
    Ok(())
}

fn reader(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn field(rec: &csv::StringRecord, i: usize, width: usize) -> Result<&str> {
    if rec.len() != width {
        return Err(Error::Parse {
            line: line_of(rec),
            message: format!("expected {width} fields, found {}", rec.len()),
        });
    }
    Ok(rec[i].trim())
}

fn number(rec: &csv::StringRecord, i: usize, width: usize, name: &str) -> Result<f64> {
    let raw = field(rec, i, width)?;
    raw.parse::<f64>().map_err(|_| Error::Parse {
        line: line_of(rec),
        message: format!("{name} '{raw}' is not a number"),
    })
}

/// Reads a `respondent_id,stated_wtp` table and validates it under `label`.
pub fn read_wtp(input: impl Read, label: Elicitation) -> Result<WtpSample> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &WTP_HEADER)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = field(&rec, 0, 2)?.to_string();
        rows.push((id, number(&rec, 1, 2, "stated_wtp")?));
    }
    validate_sample(label, &rows)
}

/// Reads a `respondent_id,price_cue,accept` table. Without a declared grid the
/// observed distinct cues become the grid.
pub fn read_dc(input: impl Read, grid: Option<&[f64]>) -> Result<DcDataset> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &DC_HEADER)?;
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = field(&rec, 0, 3)?.to_string();
        let price_cue = number(&rec, 1, 3, "price_cue")?;
        let accept = match field(&rec, 2, 3)? {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::SchemaMismatch {
                    line: Some(line_of(&rec)),
                    message: format!("respondent '{id}': accept must be 0 or 1, found '{other}'"),
                })
            }
        };
        records.push(DcRecord {
            id: Some(id),
            price_cue,
            accept,
        });
    }
    match grid {
        Some(g) => DcDataset::new(records, g.to_vec()),
        None => DcDataset::with_observed_grid(records),
    }
}

pub fn load_wtp_csv(path: impl AsRef<Path>, label: Elicitation) -> Result<WtpSample> {
    read_wtp(File::open(path)?, label)
}

pub fn load_dc_csv(path: impl AsRef<Path>, grid: Option<&[f64]>) -> Result<DcDataset> {
    read_dc(File::open(path)?, grid)
}

/// Respondent ids, generating `r1, r2, …` when the sample carries none.
fn ids_or_generated(ids: Option<&[String]>, n: usize) -> Vec<String> {
    match ids {
        Some(ids) => ids.to_vec(),
        None => (1..=n).map(|i| format!("r{i}")).collect(),
    }
}

pub fn write_wtp(out: impl Write, s: &WtpSample) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(WTP_HEADER)?;
    for (id, v) in ids_or_generated(s.ids(), s.len()).iter().zip(s.values()) {
        w.write_record([id.as_str(), &v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dc(out: impl Write, d: &DcDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DC_HEADER)?;
    for (i, r) in d.records().iter().enumerate() {
        let id = r.id.clone().unwrap_or_else(|| format!("r{}", i + 1));
        w.write_record([
            id.as_str(),
            &r.price_cue.to_string(),
            if r.accept { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve(out: impl Write, c: &DemandCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for p in &c.points {
        w.write_record([p.price.to_string(), p.share.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One tidy row per grid set × series × metric for the given mode.
pub fn write_study(out: impl Write, r: &StudyResult, mode: DcMeanMode) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STUDY_HEADER)?;
    for c in r.cells.iter().filter(|c| c.mode == mode) {
        w.write_record([
            c.grid_set.to_string(),
            c.levels.to_string(),
            c.series.as_str().to_string(),
            c.mode.as_str().to_string(),
            c.metric.as_str().to_string(),
            c.true_value.to_string(),
            c.estimate.to_string(),
            c.interval.lower.to_string(),
            c.interval.upper.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: impl AsRef<Path>) -> Result<File> {
    Ok(File::create(path)?)
}

pub fn save_wtp_csv(path: impl AsRef<Path>, s: &WtpSample) -> Result<()> {
    write_wtp(create(path)?, s)
}

pub fn save_dc_csv(path: impl AsRef<Path>, d: &DcDataset) -> Result<()> {
    write_dc(create(path)?, d)
}

pub fn save_curve_csv(path: impl AsRef<Path>, c: &DemandCurve) -> Result<()> {
    write_curve(create(path)?, c)
}

pub fn save_study_csv(path: impl AsRef<Path>, r: &StudyResult, mode: DcMeanMode) -> Result<()> {
    write_study(create(path)?, r, mode)
}
