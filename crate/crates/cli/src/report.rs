//! Report envelopes and their JSON / CSV renderings.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;

pub const SCHEMA: &str = "gaussmet/1";

/// Rows with a fixed header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    /// One row from the scalar fields of a struct; nested fields are skipped.
    pub fn single<T: Serialize>(item: &T) -> Self {
        Self::from_items(std::slice::from_ref(item))
    }

    /// One row per item, columns from the first item's scalar fields.
    pub fn from_items<T: Serialize>(items: &[T]) -> Self {
        let values: Vec<Value> = items.iter().map(|i| serde_json::to_value(i).expect("serializable")).collect();
        let header: Vec<String> = match values.first() {
            Some(Value::Object(map)) => {
                map.iter().filter(|(_, v)| !v.is_array() && !v.is_object()).map(|(k, _)| k.clone()).collect()
            }
            _ => Vec::new(),
        };
        let rows =
            values.iter().map(|v| header.iter().map(|k| v.get(k).cloned().unwrap_or(Value::Null)).collect()).collect();
        Self { header, rows }
    }
}

pub struct Report {
    pub command: &'static str,
    pub result: Value,
    pub table: Table,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    command: &'static str,
    result: &'a Value,
}

impl Report {
    pub fn new<T: Serialize>(command: &'static str, result: &T, table: Table) -> Self {
        Self { command, result: serde_json::to_value(result).expect("serializable"), table }
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let env = Envelope { schema: SCHEMA, command: self.command, result: &self.result };
                let mut out = serde_json::to_vec_pretty(&env).expect("serializable");
                out.push(b'\n');
                out
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.header).expect("in-memory write");
                for row in &self.table.rows {
                    w.write_record(row.iter().map(cell)).expect("in-memory write");
                }
                w.into_inner().expect("in-memory write")
            }
        }
    }

    pub fn write(&self, format: Format, path: Option<&std::path::Path>) -> std::io::Result<()> {
        let bytes = self.render(format);
        match path {
            Some(p) => std::fs::write(p, bytes),
            None => std::io::stdout().lock().write_all(&bytes),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
