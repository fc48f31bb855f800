use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// value ≤ bound
    AtMost,
    /// value ≥ bound
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Assertion {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            bound,
            passed: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Assertion {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            bound,
            passed: value >= bound,
        }
    }

    /// A yes/no check recorded as 1 or 0 against a bound of 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Assertion::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

/// Floats are written with 15 significant digits after the point so that
/// equal runs give byte-identical files.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.15e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(k) => k.to_string(),
            Cell::Float(x) => fmt_f64(*x),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<i64> for Cell {
    fn from(k: i64) -> Self {
        Cell::Int(k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        Ok(w.into_inner()?)
    }
}

/// Output of one suite before it is written anywhere.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.insert(key.to_string(), v);
    }

    pub fn merge(&mut self, other: Outcome) {
        self.assertions.extend(other.assertions);
        self.tables.extend(other.tables);
        self.summary.extend(other.summary);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: &'a ExperimentConfig,
    pub passed: bool,
    pub assertions: &'a [Assertion],
    pub summary: &'a Map<String, Value>,
    pub tables: Vec<String>,
}

/// File name of a table: the first table is `<command>.csv`, later ones
/// `<command>-<table>.csv`.
pub fn table_file(command: &str, index: usize, table: &Table) -> String {
    if index == 0 {
        format!("{command}.csv")
    } else {
        format!("{command}-{}.csv", table.name)
    }
}

/// Renders every file in memory, then writes them. Returns the paths written.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<Vec<PathBuf>> {
    let command = cfg.command.name();
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut names = Vec::new();
    for (i, t) in outcome.tables.iter().enumerate() {
        let name = table_file(command, i, t);
        files.push((name.clone(), t.to_csv()?));
        names.push(name);
    }
    let report = Report {
        tool: TOOL,
        version: VERSION,
        command: command.to_string(),
        config: cfg,
        passed: outcome.passed(),
        assertions: &outcome.assertions,
        summary: &outcome.summary,
        tables: names,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    files.insert(0, (format!("{command}.json"), json));

    fs::create_dir_all(&cfg.output)
        .with_context(|| format!("creating {}", cfg.output.display()))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = cfg.output.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}
