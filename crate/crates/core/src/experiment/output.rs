//! CSV and JSON output with atomic replacement and metadata sidecars.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::rng::RNG_ALGORITHM;

use super::config::ExperimentSpec;

/// Significant digits written for every floating-point cell.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Fixed-point decimal with [`SIGNIFICANT_DIGITS`] significant digits;
/// `nan`, `inf` and `-inf` for non-finite values.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return format!("{:.*}", SIGNIFICANT_DIGITS - 1, 0.0);
    }
    // The exponent after rounding to the target precision fixes the number
    // of decimals, including when rounding carries into a new digit.
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let exponent: i64 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-30..=30).contains(&exponent) {
        return sci;
    }
    let decimals = (SIGNIFICANT_DIGITS as i64 - 1 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

/// A CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
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

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Num(v) => out.push_str(&format_number(*v)),
            Cell::Text(t) => out.push_str(t),
        }
    }
}

/// An in-memory table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        CsvTable {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers only ever see the old or the complete new file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Contents of a `.meta.json` sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata<'a> {
    pub file: String,
    pub columns: &'a [String],
    pub rows: usize,
    pub spec: &'a ExperimentSpec,
    pub master_seed: u64,
    pub code_version: &'static str,
    pub rng: &'static str,
}

/// `dir/name.csv` -> `dir/name.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    csv.with_file_name(format!("{stem}.meta.json"))
}

/// Writes the table and its sidecar; returns the CSV path.
pub fn write_csv(
    dir: &Path,
    name: &str,
    table: &CsvTable,
    spec: &ExperimentSpec,
) -> Result<PathBuf> {
    let path = dir.join(name);
    write_atomic(&path, table.render().as_bytes())?;
    let meta = Metadata {
        file: name.to_string(),
        columns: table.columns(),
        rows: table.len(),
        spec,
        master_seed: spec.seed(),
        code_version: env!("CARGO_PKG_VERSION"),
        rng: RNG_ALGORITHM,
    };
    write_json(&meta_path(&path), &meta)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
