//! Deterministic report files: CSV with `#`-prefixed metadata lines and a
//! JSON mirror with `meta` and `rows` keys.
//!
//! Byte-for-byte reproducibility is a contract here, so nothing goes through
//! locale- or hash-order-dependent machinery: metadata keeps insertion
//! order, rows keep construction order, and every float prints with 17
//! significant digits via `{:.16e}`.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// One report cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    U64(u64),
    F64(f64),
    Str(String),
    Bool(bool),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }
}

/// Fixed 17-significant-digit float form used in every output file.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::U64(u) => u.to_string(),
        Value::F64(f) => fmt_f64(*f),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => {
            if s.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn json_value(v: &Value) -> String {
    match v {
        Value::U64(u) => u.to_string(),
        // JSON has no inf/nan literals; non-finite values become null.
        Value::F64(f) if !f.is_finite() => "null".to_string(),
        Value::F64(f) => fmt_f64(*f),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => format!("\"{}\"", json_escape(s)),
    }
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A tabular report: ordered metadata plus one rectangular table.
#[derive(Debug, Clone)]
pub struct Report {
    meta: Vec<(String, Value)>,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("command".to_string(), Value::str(command))],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: &str, value: Value) {
        self.meta.push((key.to_string(), value));
    }

    /// Embed the full tolerance set (reports must be reproducible from the
    /// file alone).
    pub fn push_tolerances(&mut self, tol: &relphase_core::Tolerances) {
        for (name, v) in tol.entries() {
            self.push_meta(name, Value::F64(v));
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn meta(&self) -> &[(String, Value)] {
        &self.meta
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={}\n", csv_field(v)));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"meta\": {");
        for (i, (k, v)) in self.meta.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\n    \"{}\": {}", json_escape(k), json_value(v)));
        }
        out.push_str("\n  },\n  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n    {");
            for (j, (col, v)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("\"{}\": {}", json_escape(col), json_value(v)));
            }
            out.push('}');
        }
        out.push_str("\n  ]\n}\n");
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Write to a file, or to stdout when no path is given.
    pub fn write(&self, out: Option<&Path>, format: Format) -> io::Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => fs::write(path, text),
            None => io::stdout().write_all(text.as_bytes()),
        }
    }
}
