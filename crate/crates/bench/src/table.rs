use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::BenchError;

/// One (estimator, SNR) cell. `trials` counts the trials that entered the
/// mean; `skipped` the ones where the estimator failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub estimator: String,
    pub constraint: String,
    pub snr_db: f64,
    pub mse: f64,
    pub crb_trace: Option<f64>,
    pub trials: usize,
    pub wall_time: f64,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Text form of a row; floats carry 17 significant digits so they parse
/// back to the same value.
#[derive(Serialize, Deserialize)]
struct CsvRow {
    estimator: String,
    constraint: String,
    snr_db: String,
    mse: String,
    crb_trace: String,
    trials: usize,
    wall_time: String,
    skipped: usize,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse(s: &str) -> Result<f64, BenchError> {
    s.parse().map_err(|_| BenchError::Config(format!("bad number {s:?} in table")))
}

impl ResultTable {
    pub fn get(&self, estimator: &str, snr_db: f64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.snr_db == snr_db)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(CsvRow {
                estimator: r.estimator.clone(),
                constraint: r.constraint.clone(),
                snr_db: num(r.snr_db),
                mse: num(r.mse),
                crb_trace: r.crb_trace.map(num).unwrap_or_default(),
                trials: r.trials,
                wall_time: num(r.wall_time),
                skipped: r.skipped,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<ResultTable, BenchError> {
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize::<CsvRow>() {
            let rec = rec?;
            rows.push(ResultRow {
                estimator: rec.estimator,
                constraint: rec.constraint,
                snr_db: parse(&rec.snr_db)?,
                mse: parse(&rec.mse)?,
                crb_trace: if rec.crb_trace.is_empty() { None } else { Some(parse(&rec.crb_trace)?) },
                trials: rec.trials,
                wall_time: parse(&rec.wall_time)?,
                skipped: rec.skipped,
            });
        }
        Ok(ResultTable { rows })
    }
}

/// Write the table to `path`: a header line, then one line per row.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), BenchError> {
    if table.rows.is_empty() {
        return Err(BenchError::Config("refusing to write an empty table".into()));
    }
    table.write_csv(File::create(path)?)
}
