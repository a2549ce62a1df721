//! Output formats shared by the subcommands.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

/// A single cell. Floats print with Rust's shortest round-trip formatting.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Field {
    pub fn opt(x: Option<f64>) -> Field {
        x.map_or(Field::Missing, Field::Num)
    }

    fn to_json(&self) -> Value {
        match self {
            Field::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Field::Int(i) => Value::from(*i),
            Field::Bool(b) => Value::Bool(*b),
            Field::Text(s) => Value::String(s.clone()),
            Field::Missing => Value::Null,
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Num(x) => write!(f, "{x}"),
            Field::Int(i) => write!(f, "{i}"),
            Field::Bool(b) => write!(f, "{b}"),
            Field::Text(s) => f.write_str(s),
            Field::Missing => Ok(()),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<usize> for Field {
    fn from(i: usize) -> Self {
        Field::Int(i as u64)
    }
}

impl From<u64> for Field {
    fn from(i: u64) -> Self {
        Field::Int(i)
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Bool(b)
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_owned())
    }
}

/// Rows of named columns.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// A one-row table from `(name, value)` pairs.
    pub fn record(pairs: Vec<(&str, Field)>) -> Self {
        let (headers, row): (Vec<_>, Vec<_>) = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).unzip();
        Table {
            headers,
            rows: vec![row],
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Markdown => self.to_markdown(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Field::to_string)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    fn json_value(&self) -> Value {
        let objects: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let map: Map<String, Value> = self.headers.iter().cloned().zip(row.iter().map(Field::to_json)).collect();
                Value::Object(map)
            })
            .collect();
        match <[Value; 1]>::try_from(objects) {
            Ok([single]) => single,
            Err(many) => Value::Array(many),
        }
    }

    /// A single row renders as an object, anything else as an array.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json_value()).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Field::to_string).collect()).collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([self.headers[j].len(), 3])
                    .max()
                    .unwrap_or(3)
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            out.push('|');
            for (c, w) in cells.iter().zip(&widths) {
                let _ = write!(out, " {c:<w$} |");
            }
            out.push('\n');
        };
        line(&mut out, &self.headers);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        line(&mut out, &rule);
        for r in &cells {
            line(&mut out, r);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        let x = 5.991_464_547_107_979;
        let t = Table::record(vec![("threshold", x.into()), ("e_value", Field::Missing)]);
        let csv = t.to_csv();
        let value: f64 = csv.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(value, x);
        assert_eq!(csv, "threshold,e_value\n5.991464547107979,\n");
    }

    #[test]
    fn json_shapes() {
        let t = Table::record(vec![("n", 3usize.into()), ("reject", false.into())]);
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["n"], 3);
        let mut many = Table::new(&["a"]);
        many.push(vec![1.5.into()]);
        many.push(vec![Field::Num(f64::NAN)]);
        let v: Value = serde_json::from_str(&many.to_json()).unwrap();
        assert_eq!(v[0]["a"], 1.5);
        assert!(v[1]["a"].is_null());
    }

    #[test]
    fn markdown_aligns() {
        let mut t = Table::new(&["m0", "universal"]);
        t.push(vec![0.5.into(), 5.99.into()]);
        let md = t.to_markdown();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
    }
}
