//! Trial records and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "cell_id,m,n,N,s,sigma,r,algorithm,trial,direction_error,full_error,status,degenerate,wall_ms";

/// One algorithm run on one trial of one cell. Missing errors are written as
/// empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell_id: usize,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub s: usize,
    pub sigma: f64,
    pub r: f64,
    pub algorithm: String,
    pub trial: usize,
    pub direction_error: Option<f64>,
    /// `‖f − f̂‖₂ / r`, only for full-recovery algorithms.
    pub full_error: Option<f64>,
    pub status: String,
    pub degenerate: bool,
    pub wall_ms: f64,
}

impl TrialRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if let Some(e) = self.direction_error {
            if !(0.0..=2.0 + 1e-12).contains(&e) {
                return Err(format!("direction_error {e} outside [0, 2]"));
            }
        }
        if let Some(e) = self.full_error {
            if !(e >= 0.0) {
                return Err(format!("full_error {e} is negative"));
            }
        }
        Ok(())
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[TrialRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for r in records {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads records, reporting malformed rows with their 1-based line number.
/// Empty input yields no records.
pub fn read_records<R: Read>(r: R) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows = reader.records();
    let header = match rows.next() {
        None => return Ok(Vec::new()),
        Some(h) => h?,
    };
    let header_line: Vec<&str> = header.iter().collect();
    if header_line.join(",") != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {CSV_HEADER:?}"),
        });
    }
    let columns = csv::StringRecord::from(CSV_HEADER.split(',').collect::<Vec<_>>());
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let rec: TrialRecord = row.deserialize(Some(&columns)).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        rec.check().map_err(|message| Error::Parse { line, message })?;
        out.push(rec);
    }
    Ok(out)
}
