use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

/// 17 significant digits, so values round-trip exactly.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| fmt(v)).collect());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => CliError::io(path, e),
            other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
