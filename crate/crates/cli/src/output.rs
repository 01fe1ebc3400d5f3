//! CSV and JSON emission with a run manifest.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_PRECISION: usize = 17;

/// Provenance of one run, written as CSV comments or embedded in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub model_spec_sha256: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command_line: &[String], model_spec: &str, seed: Option<u64>) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Self {
            command_line: command_line.to_vec(),
            model_spec_sha256: hex::encode(Sha256::digest(model_spec.as_bytes())),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }

    fn comment_lines(&self) -> Vec<String> {
        let json = serde_json::to_string(self).expect("manifest serializes");
        vec![format!("manifest: {json}")]
    }
}

/// Cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Num(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v.into())
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
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
        v.map_or(Cell::Missing, Into::into)
    }
}

/// `precision` significant digits in scientific notation.
pub fn format_number(v: f64, precision: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", precision.max(1) - 1, v)
    }
}

impl Cell {
    fn render(&self, precision: usize) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_number(*v, precision),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(i) => serde_json::Value::from(*i as i64),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Bool(b) => serde_json::Value::from(*b),
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A rendered CSV document: `#` comment lines, a header, and text rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvDocument {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDocument {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut comments = Vec::new();
        let mut body = String::new();
        for line in text.split_inclusive('\n') {
            if let Some(c) = line.strip_prefix("# ") {
                comments.push(c.trim_end_matches('\n').to_string());
            } else {
                body.push_str(line);
            }
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            rows.push(rec.map_err(|e| e.to_string())?.iter().map(str::to_string).collect());
        }
        Ok(Self { comments, header, rows })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for r in &self.rows {
            w.write_record(r).expect("write to memory");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf8 csv"));
        out
    }
}

/// Rows with named columns, ready to be rendered.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, manifest: &RunManifest, precision: usize) -> CsvDocument {
        CsvDocument {
            comments: manifest.comment_lines(),
            header: self.columns.iter().map(|c| c.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.render(precision)).collect())
                .collect(),
        }
    }

    pub fn to_json(&self, manifest: &RunManifest) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, serde_json::Value> =
                    self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({ "manifest": manifest, "rows": rows });
        serde_json::to_string_pretty(&doc).expect("json serializes") + "\n"
    }

    pub fn write(&self, manifest: &RunManifest, format: Format, precision: usize, out: &mut dyn Write) -> std::io::Result<()> {
        let text = match format {
            Format::Csv => self.to_csv(manifest, precision).render(),
            Format::Json => self.to_json(manifest),
        };
        out.write_all(text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.1, 17), "1.0000000000000001e-1");
        assert_eq!(format_number(0.1, 3), "1.00e-1");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_number(f64::INFINITY, 17), "inf");
    }

    #[test]
    fn document_round_trip() {
        let m = RunManifest::new(&["hullfacets".into(), "x".into()], "spec", Some(3));
        let mut t = Table::new(vec!["a", "b", "c"]);
        t.push(vec![1.5.into(), "x,y".into(), Cell::Missing]);
        t.push(vec![2u64.into(), true.into(), f64::NAN.into()]);
        let text = t.to_csv(&m, 17).render();
        assert_eq!(CsvDocument::parse(&text).unwrap().render(), text);
    }
}
