//! Deterministic CSV and JSON serialization of result tables.
//!
//! CSV files start with one `#` comment line holding the metadata as
//! compact JSON, followed by a header row and the data rows. Floats are
//! written with 17 significant digits so every value round-trips exactly.
//! JSON files hold a single object `{"data": [...], "meta": {...}}` with
//! one object per row.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    /// Rows of numbers, e.g. a convergence history.
    Nested(Vec<Vec<f64>>),
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Nested(rows) => rows
                .iter()
                .map(|r| r.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(":"))
                .collect::<Vec<_>>()
                .join(";"),
        }
    }

    fn json(&self) -> Value {
        let float = |v: f64| serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
        match self {
            Cell::Float(v) => float(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Nested(rows) => {
                Value::Array(rows.iter().map(|r| Value::Array(r.iter().map(|v| float(*v)).collect())).collect())
            }
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new(), meta: Map::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: Value) {
        self.meta.insert(key.to_string(), value);
    }

    pub fn to_bytes(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let meta = Value::Object(self.meta.clone()).to_string();
        writeln!(out, "# {meta}").expect("writing to memory");
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        writer.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv_text)).expect("writing to memory");
        }
        writer.into_inner().expect("flushing to memory")
    }

    fn to_json(&self) -> Vec<u8> {
        let data = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert(name.to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("data".into(), Value::Array(data));
        top.insert("meta".into(), Value::Object(self.meta.clone()));
        let mut out = serde_json::to_vec_pretty(&Value::Object(top)).expect("serializing a json value");
        out.push(b'\n');
        out
    }
}

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.display().to_string(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let name =
        path.file_name().ok_or_else(|| CliError::Config(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::File::create(&tmp).and_then(|mut f| {
        f.write_all(bytes)?;
        f.sync_all()
    });
    if let Err(e) = result.and_then(|_| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["epsilon", "label", "history"]);
        t.set_meta("version", Value::from("0.1.0"));
        t.push(vec![Cell::Float(0.1), Cell::from("a,b \"q\""), Cell::Nested(vec![vec![5.0, 101.0, -1e-300]])]);
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(vec!["epsilon", "level"]);
        let text = String::from_utf8(t.to_bytes(Format::Csv)).unwrap();
        assert_eq!(text, "# {}\nepsilon,level\n");
    }

    #[test]
    fn csv_quotes_and_round_trips() {
        let text = String::from_utf8(sample().to_bytes(Format::Csv)).unwrap();
        assert!(text.contains("\"a,b \"\"q\"\"\""));
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let row = reader.records().next().unwrap().unwrap();
        assert_eq!(row[0].parse::<f64>().unwrap(), 0.1);
        assert_eq!(&row[1], "a,b \"q\"");
        let hist: Vec<f64> = row[2].split(':').map(|v| v.parse().unwrap()).collect();
        assert_eq!(hist, vec![5.0, 101.0, -1e-300]);
    }

    #[test]
    fn float_text_has_17_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn json_layout_is_stable() {
        let a = sample().to_bytes(Format::Json);
        let v: Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(v["data"][0]["epsilon"], Value::from(0.1));
        assert_eq!(v["meta"]["version"], Value::from("0.1.0"));
        assert_eq!(a, sample().to_bytes(Format::Json));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
