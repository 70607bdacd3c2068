//! Report rows, JSON and table rendering.

use std::fmt::Write as _;

use qle_core::curvature::ConstraintRow;
use qle_core::transport::CoefficientRow;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// One checked quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub anchor: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Row {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, anchor: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value > tolerance`.
    pub fn above(name: &str, anchor: &str, value: f64, tolerance: f64) -> Self {
        Self {
            pass: value > tolerance,
            ..Self::at_most(name, anchor, value, tolerance)
        }
    }

    /// Relative gap `|a − b| / max(1, |b|)`.
    pub fn relative(name: &str, anchor: &str, a: f64, b: f64, tolerance: f64) -> Self {
        Self::at_most(name, anchor, (a - b).abs() / b.abs().max(1.0), tolerance)
    }
}

impl From<ConstraintRow> for Row {
    fn from(r: ConstraintRow) -> Self {
        Self {
            name: r.name,
            anchor: r.anchor,
            value: r.residual,
            tolerance: r.tolerance,
            pass: r.pass,
        }
    }
}

impl From<CoefficientRow> for Row {
    fn from(r: CoefficientRow) -> Self {
        Self {
            name: r.name,
            anchor: r.anchor,
            value: r.relative,
            tolerance: r.tolerance,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub input: String,
    pub l_max: usize,
    pub seed: u64,
    pub pass: bool,
    pub rows: Vec<Row>,
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, input: &str, l_max: usize, seed: u64, rows: Vec<Row>, details: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            input: input.into(),
            l_max,
            seed,
            pass: rows.iter().all(|r| r.pass),
            rows,
            details,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let status = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "qle {} | input {} | l_max {} | seed {} | {status}",
            self.command, self.input, self.l_max, self.seed
        );
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let _ = writeln!(out, "{:<width$}  {:>12}  {:>9}  {:<4}  anchor", "name", "value", "tolerance", "");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.4e}  {:>9.1e}  {:<4}  {}",
                r.name,
                r.value,
                r.tolerance,
                if r.pass { "ok" } else { "FAIL" },
                r.anchor
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_rendering() {
        let rows = vec![
            Row::at_most("a", "first", 1e-12, 1e-10),
            Row::above("b", "second", 0.5, 0.0),
            Row::relative("c", "third", 10.0, 10.5, 1e-3),
        ];
        assert!(rows[0].pass && rows[1].pass && !rows[2].pass);
        let r = Report::new("test", "x.json", 15, 0, rows, serde_json::json!({"k": 1}));
        assert!(!r.pass);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["rows"][2]["anchor"], "third");
        let table = r.to_table();
        assert_eq!(table.lines().count(), 5);
        assert!(table.contains("FAIL"));
    }
}
