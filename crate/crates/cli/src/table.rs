//! CSV output with `#`-prefixed header lines.

use std::fmt::Write as _;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            // shortest round-trip form: deterministic and lossless
            Cell::Num(v) => write!(out, "{v:e}").unwrap(),
            Cell::Int(v) => write!(out, "{v}").unwrap(),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Num(v) => v,
            Cell::Int(v) => v as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

/// Named columns, row-major records and free-form header notes.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub command: &'static str,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `key: value` header lines (summaries, fingerprints).
    pub notes: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(command: &'static str, columns: &[(&'static str, &'static str)]) -> Self {
        Self {
            command,
            columns: columns.iter().map(|&(name, unit)| Column { name, unit }).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        if row.len() != self.columns.len() {
            return Err(CliError::Internal(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(k) = row.iter().position(|c| !c.as_f64().is_finite()) {
            return Err(CliError::Internal(format!("non-finite value in column {}", self.columns[k].name)));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn render(&self, fingerprint: &str, seed: u64) -> String {
        let mut out = String::new();
        writeln!(out, "# {} {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"), self.command).unwrap();
        writeln!(out, "# config_sha256: {fingerprint}").unwrap();
        writeln!(out, "# seed: {seed}").unwrap();
        let units: Vec<String> = self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
        writeln!(out, "# units: {}", units.join(", ")).unwrap();
        for (k, v) in &self.notes {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        writeln!(out, "{}", names.join(",")).unwrap();
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}
