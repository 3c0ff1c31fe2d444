//! CSV time series, coefficient sidecars and experiment manifests.
//!
//! Series files carry the header `t,energy,E2,...,E_{λ+1}` and one row per
//! sample. Numbers are written with 17 significant digits so that parsing
//! recovers the stored `f64` exactly.

use rmz_core::RunResult;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn write_file(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,energy,E2,...,E_{count}`.
pub fn header(moment_count: usize) -> String {
    let mut cols = vec!["t".to_string(), "energy".to_string()];
    cols.extend((2..=moment_count).map(|i| format!("E{i}")));
    cols.join(",")
}

pub fn series_csv(result: &RunResult) -> String {
    let count = result.config.order + 1;
    let mut s = header(count);
    s.push('\n');
    for sample in &result.samples {
        let mut row = vec![number(sample.t), number(sample.energy)];
        row.extend(sample.moments.iter().skip(1).take(count - 1).map(|&v| number(v)));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Plain `key = value` sidecar describing the switch and coefficients.
pub fn coeffs_text(result: &RunResult) -> String {
    let cfg = &result.config;
    let list = |v: &[f64]| v.iter().map(|&x| number(x)).collect::<Vec<_>>().join(",");
    let mut s = String::new();
    let _ = writeln!(s, "equation = {}", cfg.equation.name());
    let _ = writeln!(s, "N = {}", cfg.resolved);
    let _ = writeln!(s, "order = {}", cfg.order);
    let _ = writeln!(s, "variant = {}", cfg.variant.name());
    let _ = writeln!(s, "solve = {}", cfg.solve.name());
    let _ = writeln!(s, "status = {}", result.status.label());
    match result.switch_time {
        Some(t) => writeln!(s, "switch_time = {}", number(t)),
        None => writeln!(s, "switch_time = none"),
    }
    .ok();
    if let Some(c) = &result.coefficients {
        let _ = writeln!(s, "coefficients = {}", list(&c.values));
    }
    if let Some(sys) = &result.system {
        let _ = writeln!(s, "singular_values = {}", list(&sys.singular_values));
        let _ = writeln!(s, "cond = {}", number(sys.condition_number()));
        let _ = writeln!(s, "pinned_cond = {}", number(sys.pinned_condition_number(cfg.drop_row)));
    }
    for note in &result.notes {
        let _ = writeln!(s, "note = {note}");
    }
    s
}

/// Sidecar path for a series file: `run.csv` becomes `run.coeffs`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("coeffs")
}

/// Writes the series and its sidecar.
pub fn emit_csv(result: &RunResult, path: &Path) -> Result<(), OutputError> {
    write_file(path, &series_csv(result))?;
    write_file(&sidecar_path(path), &coeffs_text(result))
}

/// Parses a series file back into rows.
pub fn parse_series(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("missing header")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != header.len() {
            return Err(format!("row {}: {} columns, header has {}", i + 1, row.len(), header.len()));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// One line of an experiment manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub status: String,
    pub switch_time: Option<f64>,
    pub coefficients: Vec<f64>,
    pub note: String,
}

pub const MANIFEST_HEADER: &str = "run,file,status,switch_time,coefficients,note";

pub fn manifest_csv(entries: &[ManifestEntry]) -> String {
    let mut s = String::from(MANIFEST_HEADER);
    s.push('\n');
    for e in entries {
        let coeffs: Vec<String> = e.coefficients.iter().map(|&v| number(v)).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            e.name,
            e.file,
            e.status,
            e.switch_time.map(number).unwrap_or_default(),
            coeffs.join(" "),
            e.note.replace(',', ";")
        );
    }
    s
}

pub fn write_manifest(entries: &[ManifestEntry], dir: &Path) -> Result<PathBuf, OutputError> {
    let path = dir.join("manifest.csv");
    write_file(&path, &manifest_csv(entries))?;
    Ok(path)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    write_file(path, text)
}
