//! Reproducible sweeps, solver comparisons and randomized bound audits.
//!
//! Every experiment returns a [`Table`] (or a report that can produce one)
//! whose rows are in grid order regardless of how the work was scheduled.
//! Tables are written as CSV with floats at 17 significant digits, next to a
//! JSON [`Manifest`] recording the configuration that produced them.

mod appendix_c;
mod audit;
mod nastar_figures;
mod sweep;

pub use appendix_c::{run_appendix_c_demo, AppendixCReport};
pub use audit::{
    run_random_audit, AuditKind, AuditReport, AuditSpec, Histogram, TightestInstance, Violation,
};
pub use nastar_figures::{run_fig1_left, run_fig2, NaStarFigureSpec};
pub use sweep::{
    input_families, run_appendix_d, run_fig1_right, AppendixDSpec, FamilyInstance, InputFamily, SweepRow,
    SweepSpec,
};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{TAU_CHECK, TAU_SAT};
use crate::error::{Error, Result};
use crate::fock::TAU_TRUNC;
use crate::symplectic::{TAU_PD, TAU_PHYS, TAU_SYM};

/// Numerical tolerances used across an experiment run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tau_sym: f64,
    pub tau_pd: f64,
    pub tau_phys: f64,
    pub tau_trunc: f64,
    pub tau_check: f64,
    pub tau_sat: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_sym: TAU_SYM,
            tau_pd: TAU_PD,
            tau_phys: TAU_PHYS,
            tau_trunc: TAU_TRUNC,
            tau_check: TAU_CHECK,
            tau_sat: TAU_SAT,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("tau_sym", self.tau_sym),
            ("tau_pd", self.tau_pd),
            ("tau_phys", self.tau_phys),
            ("tau_trunc", self.tau_trunc),
            ("tau_check", self.tau_check),
            ("tau_sat", self.tau_sat),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, format!("tolerance must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Cell of an output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Rectangular result table; header entries carry units in brackets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column index by header name, ignoring any bracketed unit suffix.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header
            .iter()
            .position(|h| h == name || h.split(" [").next() == Some(name))
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column(name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Output {
            path: "csv".into(),
            reason: e.to_string(),
        };
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Output {
            path: "csv".into(),
            reason: e.to_string(),
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Rows as JSON objects keyed by header.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.clone(), serde_json::to_value(c).expect("cells serialize")))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Provenance written next to every data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub spec: serde_json::Value,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub library_version: String,
}

impl Manifest {
    pub fn new(experiment: &str, spec: &impl Serialize, seed: Option<u64>, tolerances: Tolerances) -> Self {
        Self {
            experiment: experiment.to_string(),
            spec: serde_json::to_value(spec).expect("specs serialize"),
            seed,
            tolerances,
            library_version: crate::VERSION.to_string(),
        }
    }
}

/// Writes `table` to `path` and the manifest to `path` with a
/// `.manifest.json` suffix in place of the extension.
pub fn write_outputs(path: &Path, table: &Table, manifest: &Manifest) -> Result<()> {
    let io = |e: std::io::Error| Error::Output {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let file = std::fs::File::create(path).map_err(io)?;
    table.write_csv(std::io::BufWriter::new(file))?;
    let mpath = manifest_path(path);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(&mpath, json + "\n").map_err(io)?;
    Ok(())
}

pub fn manifest_path(path: &Path) -> std::path::PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.manifest.json"))
}

/// `n` points spaced evenly on a log scale over `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` evenly spaced points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
