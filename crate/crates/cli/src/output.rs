//! CSV and text writers. Column order is part of the interface:
//!
//! - time series: `t, m1, m2, m3, m4, ml_a{a}_l{lambda}..., l1_norm, min_f`
//! - snapshots: `i, x, f`
//! - report: `check, status, margin, tolerance, seconds`
//! - bounds: `key, value`

use std::fs;
use std::path::{Path, PathBuf};

use threewave_core::bounds::BoundSet;
use threewave_core::integrator::{MlPair, Trajectory};
use threewave_core::verify::VerificationReport;
use threewave_core::State;

use crate::CliError;

pub fn ml_column(pair: &MlPair) -> String {
    format!("ml_a{}_l{}", pair.a, pair.lambda)
}

pub fn timeseries_header(pairs: &[MlPair]) -> Vec<String> {
    let mut header: Vec<String> = ["t", "m1", "m2", "m3", "m4"].iter().map(|s| s.to_string()).collect();
    header.extend(pairs.iter().map(ml_column));
    header.push("l1_norm".into());
    header.push("min_f".into());
    header
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// File-name tag of a snapshot time: `1`, `10`, `0.5`.
pub fn time_tag(t: f64) -> String {
    format!("{t}")
}

fn io_err(path: &Path, source: impl Into<std::io::Error>) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: source.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    io_err(path, std::io::Error::other(e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_timeseries(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let rows = traj.rows.iter().map(|r| {
        let mut row = vec![format!("{}", r.t)];
        row.extend(r.moments.iter().map(|&m| num(m)));
        row.extend(r.ml.iter().map(|&m| num(m)));
        row.push(num(r.l1_norm));
        row.push(num(r.min_f));
        row
    });
    write_rows(path, &timeseries_header(&traj.ml_pairs), rows)
}

/// Writes `i, x, f` for cells with `x <= x_max` (all cells when `None`).
pub fn write_snapshot(path: &Path, s: &State, x_max: Option<f64>) -> Result<(), CliError> {
    let header = ["i", "x", "f"].map(String::from);
    let rows = (1..=s.len())
        .filter(|&i| x_max.map_or(true, |m| s.grid_point(i) <= m * (1.0 + 1e-12)))
        .map(|i| vec![i.to_string(), num(s.grid_point(i)), num(s.get(i))]);
    write_rows(path, &header, rows)
}

pub fn write_report_csv(path: &Path, report: &VerificationReport) -> Result<(), CliError> {
    let header = ["check", "status", "margin", "tolerance", "seconds"].map(String::from);
    write_rows(path, &header, report.csv_rows().into_iter().map(|row| row.to_vec()))
}

pub fn bounds_text(set: &BoundSet) -> String {
    let entries = set.entries();
    let width = entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    entries
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v:e}\n"))
        .collect()
}

pub fn write_bounds_csv(path: &Path, set: &BoundSet) -> Result<(), CliError> {
    let header = ["key", "value"].map(String::from);
    write_rows(path, &header, set.entries().into_iter().map(|(k, v)| vec![k, num(v)]))
}

pub fn file(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    dir.join(format!("{stem}.{ext}"))
}
