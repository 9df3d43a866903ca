use serde::Serialize;

use crate::error::{Error, Result};

/// Twelve significant digits; `nan`, `inf` and `-inf` for non-finite values.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..=11).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// A header and rows rendered to comma-separated text with LF line endings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::ConfigError(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::ConfigError(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::ConfigError(format!("csv: {e}")))
    }
}

/// One check of a verification suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Margin by which the check holds; negative when it fails.
    pub slack: f64,
    pub provenance: &'static str,
    pub detail: String,
}

impl Check {
    /// `lhs ≤ rhs + tol`.
    pub fn at_most(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tol: f64,
        provenance: &'static str,
    ) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.into(),
            pass: slack >= -tol,
            slack,
            provenance,
            detail: format!("{} <= {}", fmt_num(lhs), fmt_num(rhs)),
        }
    }

    /// `|a − b| ≤ tol`.
    pub fn close(
        name: impl Into<String>,
        a: f64,
        b: f64,
        tol: f64,
        provenance: &'static str,
    ) -> Self {
        let gap = (a - b).abs();
        Self {
            name: name.into(),
            pass: gap <= tol,
            slack: tol - gap,
            provenance,
            detail: format!("|{} - {}| <= {}", fmt_num(a), fmt_num(b), fmt_num(tol)),
        }
    }

    pub fn flag(
        name: impl Into<String>,
        pass: bool,
        provenance: &'static str,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            pass,
            slack: if pass { 0.0 } else { -1.0 },
            provenance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Worst slack among the checks.
    pub fn min_slack(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(vec![
            "suite",
            "check",
            "pass",
            "slack",
            "provenance",
            "detail",
        ]);
        for c in &self.checks {
            t.push(vec![
                self.suite.clone(),
                c.name.clone(),
                c.pass.to_string(),
                fmt_num(c.slack),
                c.provenance.into(),
                c.detail.clone(),
            ]);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000");
        assert_eq!(fmt_num(1.1473), "1.14730000000");
        assert_eq!(fmt_num(-0.0123456789012345), "-0.0123456789012");
        assert_eq!(fmt_num(123456.0), "123456.000000");
        assert_eq!(fmt_num(1e-9), "1.00000000000e-9");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_uses_lf() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
