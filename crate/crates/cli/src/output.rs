//! File writers shared by the commands.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any double.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Largest `|q - q₀| / |q₀|` (absolute when `q₀ = 0`).
pub fn max_rel_drift(series: &[f64]) -> f64 {
    let Some(&q0) = series.first() else {
        return 0.0;
    };
    let scale = if q0 != 0.0 { q0.abs() } else { 1.0 };
    series
        .iter()
        .fold(0.0f64, |m, q| m.max((q - q0).abs() / scale))
}
