//! Curve tables and their CSV serialization.
//!
//! Figures in this domain are published without tabulated data, so the CSV
//! is the reproducibility contract: a comment block captures the full config
//! and seed, and numbers are written with 17 significant digits so that
//! byte-identity of reruns is checkable.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::ExperimentError;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// 17 significant digits; enough to reconstruct the exact f64.
pub fn format_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A rectangular result table with a provenance comment header.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    header_lines: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CurveTable {
    pub fn new(header_lines: Vec<String>, columns: Vec<String>) -> Self {
        Self {
            header_lines,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric value at (row, named column), if that cell is numeric.
    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.header_lines {
            writeln!(out, "# {line}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", rendered.join(",")).unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ExperimentError> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| ExperimentError::Io(path.display().to_string(), e.to_string()))?;
        file.write_all(self.to_csv().as_bytes())
            .map_err(|e| ExperimentError::Io(path.display().to_string(), e.to_string()))?;
        Ok(())
    }
}

/// Standard provenance header: artifact version, the driving command, the
/// effective seed, and the full config echoed as commented TOML.
pub fn provenance_header(command: &str, seed: u64, config_toml: &str) -> Vec<String> {
    let mut lines = vec![
        format!("cavity-erasure v{}", env!("CARGO_PKG_VERSION")),
        format!("command = {command}"),
        format!("seed = {seed}"),
        "config:".to_string(),
    ];
    for line in config_toml.lines() {
        lines.push(format!("  {line}"));
    }
    lines
}
