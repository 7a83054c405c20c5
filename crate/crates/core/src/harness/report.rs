//! Per-check rows, suite summaries, and their CSV/JSON forms.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// A pass/fail check.
    Check,
    /// Plot-ready data (profiles, measured values).
    Data,
    /// A note that is neither a check nor data.
    Info,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowKind::Check => "check",
            RowKind::Data => "data",
            RowKind::Info => "info",
        })
    }
}

/// One record of a suite report. Checks compare `lhs` against `rhs`; `pass` is `None` for
/// anything that is not a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub kind: RowKind,
    pub name: String,
    pub subject: String,
    pub r: Option<u32>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub pass: Option<bool>,
    pub detail: String,
}

impl Row {
    pub fn check(name: impl Into<String>, subject: impl Into<String>, pass: bool) -> Self {
        Row {
            kind: RowKind::Check,
            name: name.into(),
            subject: subject.into(),
            r: None,
            lhs: None,
            rhs: None,
            pass: Some(pass),
            detail: String::new(),
        }
    }

    /// `lhs ≤ rhs`.
    pub fn at_most(name: impl Into<String>, subject: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Row { lhs: Some(lhs), rhs: Some(rhs), ..Row::check(name, subject, lhs <= rhs) }
    }

    /// `lhs ≥ rhs`.
    pub fn at_least(name: impl Into<String>, subject: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Row { lhs: Some(lhs), rhs: Some(rhs), ..Row::check(name, subject, lhs >= rhs) }
    }

    /// `|lhs − rhs| ≤ tol`.
    pub fn within(name: impl Into<String>, subject: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Row { lhs: Some(lhs), rhs: Some(rhs), ..Row::check(name, subject, (lhs - rhs).abs() <= tol) }
            .detail(format!("tol={tol}"))
    }

    pub fn data(name: impl Into<String>, subject: impl Into<String>, r: Option<u32>, value: Option<f64>) -> Self {
        Row {
            kind: RowKind::Data,
            name: name.into(),
            subject: subject.into(),
            r,
            lhs: value,
            rhs: None,
            pass: None,
            detail: String::new(),
        }
    }

    pub fn info(name: impl Into<String>, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Row {
            kind: RowKind::Info,
            name: name.into(),
            subject: subject.into(),
            r: None,
            lhs: None,
            rhs: None,
            pass: None,
            detail: detail.into(),
        }
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn at_r(mut self, r: u32) -> Self {
        self.r = Some(r);
        self
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass_count: usize,
    pub fail_count: usize,
    pub measured_constants: BTreeMap<String, f64>,
    pub rows: Vec<Row>,
}

impl SuiteReport {
    /// Sorts rows by `(name, subject, r, kind)` so the report does not depend on the order in
    /// which checks finished.
    pub fn new(suite: impl Into<String>, mut rows: Vec<Row>, measured_constants: BTreeMap<String, f64>) -> Self {
        rows.sort_by(|a, b| {
            (&a.name, &a.subject, a.r, a.kind).cmp(&(&b.name, &b.subject, b.r, b.kind))
        });
        let pass_count = rows.iter().filter(|r| r.pass == Some(true)).count();
        let fail_count = rows.iter().filter(|r| r.failed()).count();
        SuiteReport { suite: suite.into(), pass_count, fail_count, measured_constants, rows }
    }

    pub fn passed(&self) -> bool {
        self.fail_count == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.failed())
    }

    /// Rows with the given check name.
    pub fn rows_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.measured_constants.get(name).copied()
    }

    /// Pretty JSON; non-finite numbers become `null`.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    /// One CSV table: the rows, then one `constant` row per measured constant, then the counts.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Internal(e.to_string());
        w.write_record(["suite", "kind", "name", "subject", "r", "lhs", "rhs", "pass", "detail"]).map_err(err)?;
        let num = |v: Option<f64>| v.filter(|v| v.is_finite()).map(|v| v.to_string()).unwrap_or_default();
        for row in &self.rows {
            w.write_record([
                self.suite.clone(),
                row.kind.to_string(),
                row.name.clone(),
                row.subject.clone(),
                row.r.map(|r| r.to_string()).unwrap_or_default(),
                num(row.lhs),
                num(row.rhs),
                row.pass.map(|p| p.to_string()).unwrap_or_default(),
                row.detail.clone(),
            ])
            .map_err(err)?;
        }
        for (name, v) in &self.measured_constants {
            w.write_record([&self.suite, "constant", name, "", "", &num(Some(*v)), "", "", ""]).map_err(err)?;
        }
        for (name, v) in [("pass_count", self.pass_count), ("fail_count", self.fail_count)] {
            w.write_record([&self.suite, "summary", name, "", "", &v.to_string(), "", "", ""]).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SuiteReport {
        let rows = vec![
            Row::at_most("b", "x", 1.0, 2.0),
            Row::at_most("a", "y, \"quoted\"", 3.0, 2.0),
            Row::data("profile", "x", Some(2), Some(f64::NAN)),
            Row::info("note", "x", "text"),
        ];
        let mut c = BTreeMap::new();
        c.insert("k".to_string(), 1.5);
        SuiteReport::new("demo", rows, c)
    }

    #[test]
    fn counts_and_order() {
        let r = sample();
        assert_eq!((r.pass_count, r.fail_count), (1, 1));
        let names: Vec<&str> = r.rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "note", "profile"]);
        assert!(!r.passed());
    }

    #[test]
    fn json_nan_is_null() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json().unwrap()).unwrap();
        assert!(v["rows"][3]["lhs"].is_null());
        assert_eq!(v["measured_constants"]["k"], 1.5);
        assert_eq!(v["fail_count"], 1);
    }

    #[test]
    fn csv_quotes_and_trailer() {
        let csv = sample().to_csv().unwrap();
        assert!(csv.contains("\"y, \"\"quoted\"\"\""));
        assert!(csv.ends_with("demo,summary,fail_count,,,1,,,\n"));
        let mut rd = csv::Reader::from_reader(csv.as_bytes());
        assert_eq!(rd.records().count(), 4 + 1 + 2);
    }
}
