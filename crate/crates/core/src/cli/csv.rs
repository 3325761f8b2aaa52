//! Plain CSV output: a header, a `# config_digest=` comment, then rows.
//! Floats use Rust's shortest round-trip scientific form, so identical
//! values always produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Formats a float for CSV.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.header.len()
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| num(v)).collect());
    }

    /// A labelled footer row, padded with empty fields to the table width.
    pub fn push_footer(&mut self, label: &str, value: &str) {
        let mut row = vec![label.to_string(), value.to_string()];
        row.resize(self.width().max(2), String::new());
        self.rows.push(row);
    }

    pub fn render(&self, digest: &str) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.header.join(",")).unwrap();
        writeln!(out, "# config_digest={digest}").unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path, digest: &str) -> Result<()> {
        std::fs::write(path, self.render(digest))?;
        Ok(())
    }
}
