//! Rendering of command results as JSON or CSV.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Format;

/// Column-major data for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<T: ToString>(&mut self, row: impl IntoIterator<Item = T>) {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    /// One row per element of `items`, columns taken from the first element's keys.
    pub fn from_records<T: Serialize>(items: &[T]) -> Self {
        let values: Vec<Value> = items.iter().map(|i| serde_json::to_value(i).expect("records serialize")).collect();
        let columns: Vec<String> = match values.first() {
            Some(Value::Object(m)) => m.keys().cloned().collect(),
            _ => vec!["value".into()],
        };
        let mut table = Table::new(columns.clone());
        for v in &values {
            table.push(columns.iter().map(|c| scalar(v.get(c).unwrap_or(&Value::Null))));
        }
        table
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Table) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        other => out.push([prefix.to_string(), scalar(other)]),
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub table: Option<Table>,
    /// Exit status 1 when false.
    pub passed: bool,
}

impl Output {
    pub fn json(value: impl Serialize) -> Self {
        Output {
            json: serde_json::to_value(value).expect("outputs serialize"),
            table: None,
            passed: true,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn render(&self, format: Format, meta: bool) -> anyhow::Result<String> {
        match format {
            Format::Json => {
                let mut value = self.json.clone();
                if meta {
                    if let Value::Object(m) = &mut value {
                        m.insert("meta".into(), meta_block());
                    } else {
                        let mut m = Map::new();
                        m.insert("result".into(), value);
                        m.insert("meta".into(), meta_block());
                        value = Value::Object(m);
                    }
                }
                Ok(serde_json::to_string_pretty(&value)? + "\n")
            }
            Format::Csv => {
                let table = match &self.table {
                    Some(t) => t.clone(),
                    None => {
                        let mut t = Table::new(["key", "value"]);
                        flatten("", &self.json, &mut t);
                        t
                    }
                };
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.columns)?;
                for row in &table.rows {
                    w.write_record(row)?;
                }
                Ok(String::from_utf8(w.into_inner()?)?)
            }
        }
    }
}

fn meta_block() -> Value {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    json!({
        "tool": "padic-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "generated_unix": secs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_fallback_flattens_objects() {
        let out = Output::json(json!({"a": 1, "b": {"c": [1, 2]}}));
        assert_eq!(out.render(Format::Csv, false).unwrap(), "key,value\na,1\nb.c,\"[1,2]\"\n");
    }

    #[test]
    fn meta_only_when_requested() {
        let out = Output::json(json!({"a": 1}));
        assert!(!out.render(Format::Json, false).unwrap().contains("meta"));
        assert!(out.render(Format::Json, true).unwrap().contains("generated_unix"));
    }
}
