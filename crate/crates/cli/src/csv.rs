//! CSV tables with a provenance comment line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

/// 17 significant digits, so values round-trip exactly.
pub fn number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    format!("{v:.16e}")
}

#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Row of an integer label followed by numbers.
    pub fn push_labeled(&mut self, label: usize, values: &[f64]) {
        let mut row = vec![label.to_string()];
        row.extend(values.iter().map(|v| number(*v)));
        self.push(row);
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.push(values.iter().map(|v| number(*v)).collect());
    }

    pub fn render(&self, provenance: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {provenance}");
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path, provenance: &str) -> Result<(), CliError> {
        std::fs::write(path, self.render(provenance)).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [1.0 / 3.0, -2.5e-13, 3.5160152685, 1e300] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(number(0.0), "0");
        assert_eq!(number(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn render_layout() {
        let mut t = Table::new(&["step", "r"]);
        t.push_labeled(0, &[0.5]);
        assert_eq!(t.render("run x"), "# run x\nstep,r\n0,5.0000000000000000e-1\n");
    }
}
