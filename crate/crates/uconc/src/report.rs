//! Machine-readable experiment output (JSON or CSV).

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

/// Finite floats as JSON numbers; infinities and NaN as strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn text(s: impl ToString) -> Value {
    Value::String(s.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// A named pass/fail comparison of a value against a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Value,
    pub bound: Value,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: Value, bound: Value, pass: bool) -> Self {
        Self { name: name.into(), value, bound, pass }
    }

    /// `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, num(value), num(bound), value <= bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
}

impl ExperimentReport {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            tables: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            kernel: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out).map_err(|e| crate::error::CliError::io("<output>", e))?;
        Ok(())
    }

    /// Each table as a `# table NAME` line followed by a CSV block; checks last.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| crate::error::CliError::io("<output>", e);
        let mut checks = Table::new("checks", &["name", "value", "bound", "pass"]);
        for c in &self.checks {
            checks.push(vec![text(&c.name), c.value.clone(), c.bound.clone(), Value::Bool(c.pass)]);
        }
        let tables = self.tables.iter().chain((!self.checks.is_empty()).then_some(&checks));
        for (i, table) in tables.enumerate() {
            if i > 0 {
                writeln!(out).map_err(io)?;
            }
            writeln!(out, "# table {}", table.name).map_err(io)?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(cell))?;
            }
            w.flush().map_err(io)?;
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
