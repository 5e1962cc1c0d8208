//! CSV output: a `#` header block followed by numeric rows.
//!
//! Floats are printed with 17 significant digits so rows parse back to the
//! same doubles. Rows are buffered and written once, in input order.

use std::fmt::Write as _;

pub struct Table {
    header: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        let header = vec![
            format!("cascade {} {command}", env!("CARGO_PKG_VERSION")),
            "all rates in units of gamma".to_string(),
        ];
        Self { header, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.header.push(text.into());
    }

    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) {
        self.header.push(format!("param {key} = {value}"));
    }

    pub fn tolerance(&mut self, key: &str, value: f64) {
        self.header.push(format!("tolerance {key} = {value:e}"));
    }

    pub fn row(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            writeln!(out, "# {h}").unwrap();
        }
        writeln!(out, "# columns: {}", self.columns.join(",")).unwrap();
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format_float(*v)).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
