//! Experiment reports and their JSON, CSV and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use super::config::ExperimentKind;
use crate::error::{Error, Result};
use crate::numfmt::{fmt12, round12};

/// A table or assertion value.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt12(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Num(x) if x.is_finite() => s.serialize_f64(round12(*x)),
            Cell::Num(x) => s.serialize_str(&x.to_string()),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    #[serde(skip)]
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_field(&c.render())).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `|actual - expected| <= tolerance` for numbers, equality otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub expected: Cell,
    pub actual: Cell,
    #[serde(serialize_with = "ser12")]
    pub tolerance: f64,
    pub passed: bool,
}

fn ser12<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*v))
}

impl Assertion {
    pub fn close(name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Assertion {
        Assertion {
            name: name.into(),
            expected: Cell::Num(expected),
            actual: Cell::Num(actual),
            tolerance,
            passed: (actual - expected).abs() <= tolerance,
        }
    }

    /// `|actual| <= bound`.
    pub fn small(name: impl Into<String>, actual: f64, bound: f64) -> Assertion {
        Assertion::close(name, 0.0, actual, bound)
    }

    pub fn equal(name: impl Into<String>, expected: impl Into<Cell>, actual: impl Into<Cell>) -> Assertion {
        let (expected, actual) = (expected.into(), actual.into());
        Assertion {
            name: name.into(),
            passed: expected == actual,
            expected,
            actual,
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub inputs: Value,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    /// Structured results beyond tables, keyed by name.
    pub extra: BTreeMap<String, Value>,
    /// Measured by the runner; not written to files, which stay
    /// byte-identical between runs.
    pub wall_clock: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            _ => Err(Error::InvalidArgument(format!("unknown format `{s}` (json, csv, text)"))),
        }
    }
}

impl ExperimentReport {
    pub fn new(experiment: ExperimentKind, inputs: Value) -> ExperimentReport {
        ExperimentReport {
            experiment,
            inputs,
            tables: Vec::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            extra: BTreeMap::new(),
            wall_clock: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json_value(&self) -> Value {
        let tables: serde_json::Map<String, Value> = self
            .tables
            .iter()
            .map(|t| (t.name.clone(), serde_json::to_value(t).expect("tables serialize")))
            .collect();
        let mut v = json!({
            "experiment": self.experiment.name(),
            "inputs": self.inputs,
            "tables": tables,
            "assertions": self.assertions,
            "notes": self.notes,
            "passed": self.passed(),
        });
        if !self.extra.is_empty() {
            v["results"] = json!(self.extra);
        }
        v
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "experiment: {}", self.experiment);
        let _ = writeln!(out, "verdict: {verdict}");
        out.push('\n');
        for a in &self.assertions {
            let _ = writeln!(
                out,
                "[{}] {}: expected {} actual {} tolerance {}",
                if a.passed { "PASS" } else { "FAIL" },
                a.name,
                a.expected.render(),
                a.actual.render(),
                fmt12(a.tolerance)
            );
        }
        for t in &self.tables {
            let _ = writeln!(out, "\n== {} ==", t.name);
            let rendered: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|j| {
                    rendered
                        .iter()
                        .map(|r| r[j].chars().count())
                        .chain([t.columns[j].chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let _ = writeln!(out, "{}", line(&t.columns));
            for r in &rendered {
                let _ = writeln!(out, "{}", line(r));
            }
        }
        if !self.notes.is_empty() {
            out.push_str("\nnotes:\n");
            for n in &self.notes {
                let _ = writeln!(out, "- {n}");
            }
        }
        for (k, v) in &self.extra {
            let _ = writeln!(out, "\n== {k} ==\n{}", serde_json::to_string_pretty(v).expect("json"));
        }
        out
    }

    fn assertions_table(&self) -> Table {
        let mut t = Table::new("assertions", &["name", "expected", "actual", "tolerance", "passed"]);
        for a in &self.assertions {
            t.push(vec![
                a.name.as_str().into(),
                a.expected.clone(),
                a.actual.clone(),
                a.tolerance.into(),
                a.passed.into(),
            ]);
        }
        t
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the report under `dir` and returns the files written. JSON and
/// text produce one file; CSV produces one file per table plus the
/// assertions.
pub fn emit_report(report: &ExperimentReport, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = report.experiment.name();
    match format {
        OutputFormat::Json => Ok(vec![write_file(dir.join(format!("{stem}.json")), &report.to_json())?]),
        OutputFormat::Text => Ok(vec![write_file(dir.join(format!("{stem}.txt")), &report.to_text())?]),
        OutputFormat::Csv => {
            let mut written = Vec::new();
            for t in report.tables.iter().chain([&report.assertions_table()]) {
                written.push(write_file(dir.join(format!("{stem}-{}.csv", t.name)), &t.to_csv())?);
            }
            Ok(written)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new(ExperimentKind::Covariance, json!({"b": 1, "a": [0.5]}));
        let mut t = Table::new("levels", &["n", "value", "label"]);
        t.push(vec![0usize.into(), (1.0 / 3.0).into(), "a, b".into()]);
        r.tables.push(t);
        r.assertions.push(Assertion::close("third", 0.333, 1.0 / 3.0, 1e-3));
        r.assertions.push(Assertion::equal("class", "General", "General"));
        r
    }

    #[test]
    fn json_is_sorted_and_rounded() {
        let s = sample().to_json();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("0.333333333333"));
        assert!(!s.contains("0.3333333333333"));
        assert!(s.contains("\"passed\": true"));
    }

    #[test]
    fn csv_quotes_fields() {
        let r = sample();
        assert_eq!(r.tables[0].to_csv(), "n,value,label\n0,0.333333333333,\"a, b\"\n");
    }

    #[test]
    fn failing_assertion_fails_report() {
        let mut r = sample();
        r.assertions.push(Assertion::small("drift", 2e-12, 1e-12));
        assert!(!r.passed());
        assert!(r.to_text().contains("[FAIL] drift"));
    }

    #[test]
    fn emit_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let files = emit_report(&r, OutputFormat::Csv, dir.path()).unwrap();
        let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
        assert_eq!(names, ["covariance-levels.csv", "covariance-assertions.csv"]);
        let a = emit_report(&r, OutputFormat::Json, dir.path()).unwrap();
        let first = std::fs::read(&a[0]).unwrap();
        emit_report(&r, OutputFormat::Json, dir.path()).unwrap();
        assert_eq!(first, std::fs::read(&a[0]).unwrap());
    }

    #[test]
    fn unwritable_directory_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let target = blocker.join("sub");
        let err = emit_report(&sample(), OutputFormat::Json, &target).unwrap_err();
        assert!(err.to_string().contains(&*target.to_string_lossy()), "{err}");
    }
}
