//! CSV and JSON writers.
//!
//! Numbers are written with 17 significant digits so they read back exactly;
//! non-finite values become the token `nan`. Lines end with `\n`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use abcd_core::experiments::{ConvergenceReport, WaveTrack};
use abcd_core::SimState;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".to_string()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(&r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// `dx,error,rate`; a blown-up row has an empty error, the first row an empty rate.
pub fn write_convergence_csv(report: &ConvergenceReport, path: &Path) -> Result<(), CliError> {
    let rows = report
        .rows
        .iter()
        .map(|r| vec![fmt_num(r.dx), fmt_opt(r.error()), fmt_opt(r.rate)]);
    write_rows(path, &["dx", "error", "rate"], rows)
}

/// `t,position,amplitude`.
pub fn write_track_csv(track: &WaveTrack, path: &Path) -> Result<(), CliError> {
    let rows = track
        .points
        .iter()
        .map(|p| vec![fmt_num(p.t), fmt_num(p.position), fmt_num(p.amplitude)]);
    write_rows(path, &["t", "position", "amplitude"], rows)
}

/// `t,max_eta`.
pub fn write_peak_csv(peak: &[(f64, f64)], path: &Path) -> Result<(), CliError> {
    let rows = peak.iter().map(|(t, p)| vec![fmt_num(*t), fmt_num(*p)]);
    write_rows(path, &["t", "max_eta"], rows)
}

/// Generic table writer for small diagnostic outputs.
pub fn write_table_csv(header: &[&str], rows: &[Vec<Option<f64>>], path: &Path) -> Result<(), CliError> {
    write_rows(path, header, rows.iter().map(|r| r.iter().map(|v| fmt_opt(*v)).collect()))
}

/// One time level: `(x_center, eta, u)` per cell, `x` increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
}

impl FieldSnapshot {
    pub fn from_state(s: &SimState) -> Self {
        Self {
            t: s.t,
            x: s.grid().centers(),
            eta: s.eta.values().to_vec(),
            u: s.u.values().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// All snapshots in one long table `t,x,eta,u`, one block per time level.
pub fn write_snapshots_csv(snaps: &[FieldSnapshot], path: &Path) -> Result<(), CliError> {
    let rows = snaps.iter().flat_map(|s| {
        (0..s.len()).map(move |j| vec![fmt_num(s.t), fmt_num(s.x[j]), fmt_num(s.eta[j]), fmt_num(s.u[j])])
    });
    write_rows(path, &["t", "x", "eta", "u"], rows)
}

fn parse_cell(s: &str) -> Option<f64> {
    match s {
        "" => None,
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Reads any CSV written here: header plus rows of optional numbers.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<Option<f64>>>), CliError> {
    let mut r = csv::ReaderBuilder::new().from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        rows.push(rec.iter().map(parse_cell).collect());
    }
    Ok((header, rows))
}

/// Splits a `t,x,eta,u` table back into time levels.
pub fn read_snapshots_csv(path: &Path) -> Result<Vec<FieldSnapshot>, CliError> {
    let (_, rows) = read_csv(path)?;
    let mut out: Vec<FieldSnapshot> = Vec::new();
    for r in rows {
        let v: Vec<f64> = r.iter().map(|c| c.unwrap_or(f64::NAN)).collect();
        if v.len() != 4 {
            return Err(CliError::Config(format!("{}: expected 4 columns", path.display())));
        }
        let fresh = out.last().map_or(true, |s| s.t.to_bits() != v[0].to_bits());
        if fresh {
            out.push(FieldSnapshot {
                t: v[0],
                x: Vec::new(),
                eta: Vec::new(),
                u: Vec::new(),
            });
        }
        let s = out.last_mut().unwrap();
        s.x.push(v[1]);
        s.eta.push(v[2]);
        s.u.push(v[3]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonSummary {
    pub command: String,
    pub config: crate::config::RunConfig,
    pub wall_clock_seconds: f64,
    pub diagnostics: serde_json::Map<String, serde_json::Value>,
}

pub fn write_json_summary(summary: &JsonSummary, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let text = serde_json::to_string_pretty(summary).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.write_all(b"\n").map_err(io_err(path))
}
