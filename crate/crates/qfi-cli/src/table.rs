//! Result tables and their CSV / JSON encodings.
//!
//! CSV: header line, comma separated, floats as `{:.16e}` (17 significant
//! digits), empty field for a missing value, `\n` line endings.
//!
//! JSON (`qfi-table/1`):
//!
//! ```text
//! {"schema": "qfi-table/1", "command": "...", "columns": ["..."],
//!  "rows": [[...], ...]}
//! ```
//!
//! Missing and non-finite numbers are `null`.

use crate::config::Format;
use serde_json::{json, Value as Json};

pub const SCHEMA: &str = "qfi-table/1";

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Missing,
    Text(String),
    Bool(bool),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Float)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(k) => k.to_string(),
            Value::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Value::Float(x) => x.to_string(),
            Value::Missing => String::new(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(k) => json!(k),
            Value::Float(x) if x.is_finite() => json!(x),
            Value::Float(_) | Value::Missing => Json::Null,
            Value::Bool(b) => json!(b),
            Value::Text(s) => json!(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            Value::Int(k) => Some(*k as f64),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Table { command: command.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Column `name` as floats; missing entries are `None`.
    pub fn floats(&self, name: &str) -> Vec<Option<f64>> {
        match self.column(name) {
            Some(j) => self.rows.iter().map(|r| r[j].as_f64()).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> Json {
        let rows: Vec<Json> = self.rows.iter().map(|r| Json::Array(r.iter().map(Value::json).collect())).collect();
        json!({ "schema": SCHEMA, "command": self.command, "columns": self.columns, "rows": rows })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("tables serialize");
                s.push('\n');
                s
            }
        }
    }
}
