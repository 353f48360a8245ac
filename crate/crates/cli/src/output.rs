//! Tables and reports, rendered as CSV or JSON with a provenance header.

use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

pub const PRNG: &str = "chacha8";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => {
        vec![$($crate::output::Cell::from($v)),*]
    };
}

#[derive(Clone, Debug)]
pub enum Artifact {
    /// A sweep; csv by default.
    Table(Table),
    /// A single object; json by default.
    Report(Value),
}

/// What a command produced, plus a pass/fail verdict for claim checks.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub artifact: Artifact,
    pub verdict: Option<bool>,
    pub summary: Option<String>,
}

impl Outcome {
    pub fn table(t: Table) -> Self {
        Outcome {
            artifact: Artifact::Table(t),
            verdict: None,
            summary: None,
        }
    }

    pub fn report(v: impl Serialize) -> Result<Self, CliError> {
        let value = serde_json::to_value(v)
            .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
        Ok(Outcome {
            artifact: Artifact::Report(value),
            verdict: None,
            summary: None,
        })
    }

    pub fn verdict(mut self, pass: bool, summary: impl Into<String>) -> Self {
        self.verdict = Some(pass);
        self.summary = Some(summary.into());
        self
    }
}

pub fn render(outcome: &Outcome, cfg: &ExperimentConfig) -> Result<String, CliError> {
    let format = cfg.format.unwrap_or(match outcome.artifact {
        Artifact::Table(_) => Format::Csv,
        Artifact::Report(_) => Format::Json,
    });
    match format {
        Format::Csv => render_csv(&outcome.artifact, cfg),
        Format::Json => render_json(outcome, cfg),
    }
}

fn header(cfg: &ExperimentConfig) -> String {
    format!(
        "# clockforge {} config_hash={} seed={} prng={PRNG} tol={:e}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.hash(),
        cfg.seed,
        cfg.tol
    )
}

fn render_csv(artifact: &Artifact, cfg: &ExperimentConfig) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    match artifact {
        Artifact::Table(t) => {
            w.write_record(&t.columns).map_err(csv_err)?;
            for r in &t.rows {
                w.write_record(r.iter().map(Cell::csv)).map_err(csv_err)?;
            }
        }
        Artifact::Report(v) => {
            w.write_record(["field", "value"]).map_err(csv_err)?;
            match v {
                Value::Object(map) => {
                    for (k, v) in map {
                        w.write_record([k.as_str(), &scalar(v)]).map_err(csv_err)?;
                    }
                }
                other => w.write_record(["value", &scalar(other)]).map_err(csv_err)?,
            }
        }
    }
    let body = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("csv: {e}")))?;
    Ok(header(cfg) + &String::from_utf8(body).expect("csv output is utf-8"))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_json(outcome: &Outcome, cfg: &ExperimentConfig) -> Result<String, CliError> {
    let result = match &outcome.artifact {
        Artifact::Table(t) => serde_json::to_value(t),
        Artifact::Report(v) => Ok(v.clone()),
    }
    .map_err(|e| CliError::Config(format!("cannot serialize: {e}")))?;
    let mut doc = serde_json::json!({
        "tool": "clockforge",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "prng": PRNG,
        "tol": cfg.tol,
    });
    if let Some(pass) = outcome.verdict {
        doc["verdict"] = Value::Bool(pass);
    }
    doc["result"] = result;
    let mut s = serde_json::to_string_pretty(&doc).expect("json value");
    s.push('\n');
    Ok(s)
}
