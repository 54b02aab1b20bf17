//! Tabular results, the run manifest and their CSV/JSON renderings.

use std::time::Duration;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use sepscope::sampling::SequenceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => json!(s),
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub parameters: Value,
    pub sequence: Option<SequenceSpec>,
    pub workers: Option<usize>,
    pub wall_time_seconds: f64,
    pub data_sha256: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: Value, sequence: Option<SequenceSpec>, workers: Option<usize>) -> Self {
        Self {
            tool: "sepscope",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_owned(),
            parameters,
            sequence,
            workers,
            wall_time_seconds: 0.0,
            data_sha256: String::new(),
        }
    }
}

/// The data section alone, in the requested format.
pub fn render_data(tables: &[Table], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            for (k, t) in tables.iter().enumerate() {
                if k > 0 {
                    out.push('\n');
                }
                out.push_str(&format!("# table: {}\n", t.name));
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                w.write_record(&t.columns).expect("in-memory write");
                for r in &t.rows {
                    w.write_record(r.iter().map(Cell::csv)).expect("in-memory write");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells"));
            }
            out
        }
        Format::Json => serde_json::to_string(&data_json(tables)).expect("plain JSON values"),
    }
}

fn data_json(tables: &[Table]) -> Value {
    let mut m = Map::new();
    for t in tables {
        m.insert(
            t.name.clone(),
            json!({
                "columns": t.columns,
                "rows": t.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
        );
    }
    Value::Object(m)
}

pub fn sha256_hex(data: &str) -> String {
    hex::encode(Sha256::digest(data.as_bytes()))
}

/// Full document: manifest followed by the data section.
pub fn render(manifest: &RunManifest, tables: &[Table], format: Format, elapsed: Duration) -> String {
    let data = render_data(tables, format);
    let mut m = manifest.clone();
    m.wall_time_seconds = elapsed.as_secs_f64();
    m.data_sha256 = sha256_hex(&data);
    match format {
        Format::Csv => {
            let head = [
                ("tool", m.tool.to_owned()),
                ("version", m.version.to_owned()),
                ("subcommand", m.subcommand.clone()),
                ("parameters", compact(&m.parameters)),
                ("sequence", compact(&m.sequence)),
                ("workers", compact(&m.workers)),
                ("wall_time_seconds", m.wall_time_seconds.to_string()),
                ("data_sha256", m.data_sha256.clone()),
            ]
            .iter()
            .map(|(k, v)| format!("# {k}: {v}\n"))
            .collect::<String>();
            head + &data
        }
        Format::Json => {
            let doc = json!({ "manifest": m, "data": data_json(tables) });
            let mut s = serde_json::to_string_pretty(&doc).expect("plain JSON values");
            s.push('\n');
            s
        }
    }
}

fn compact<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("manifest fields serialize")
}

/// Splits a rendered document into its data section, which is the part
/// covered by `data_sha256`.
pub fn data_section(document: &str, format: Format) -> Option<String> {
    match format {
        Format::Csv => document.find("# table: ").map(|i| document[i..].to_owned()),
        Format::Json => {
            let v: Value = serde_json::from_str(document).ok()?;
            serde_json::to_string(v.get("data")?).ok()
        }
    }
}

/// `data_sha256` recorded in a rendered document.
pub fn recorded_digest(document: &str, format: Format) -> Option<String> {
    match format {
        Format::Csv => document
            .lines()
            .find_map(|l| l.strip_prefix("# data_sha256: "))
            .map(str::to_owned),
        Format::Json => {
            let v: Value = serde_json::from_str(document).ok()?;
            v.pointer("/manifest/data_sha256")?.as_str().map(str::to_owned)
        }
    }
}
