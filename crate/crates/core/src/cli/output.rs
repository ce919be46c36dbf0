//! CSV and JSON rendering of result tables.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::config::{Format, RunConfig};
use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(format_float(*v)),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra JSON-only fields, e.g. a summary report.
    pub extra: Map<String, Value>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self { headers: headers.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.headers).map_err(runtime)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(runtime)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }

    pub fn to_json(&self, command: &str, config: &RunConfig, seed: Option<u64>) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.headers.iter().zip(r).map(|(h, c)| (h.to_string(), c.json())).collect()))
            .collect();
        let mut doc = json!({
            "metadata": {
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "seed": seed,
                "columns": self.headers,
                "config": config.echo(),
            },
            "rows": rows,
        });
        for (k, v) in &self.extra {
            doc[k] = v.clone();
        }
        let mut out = serde_json::to_vec_pretty(&doc).map_err(runtime)?;
        out.push(b'\n');
        Ok(out)
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Renders `table` and writes it to `output` (stdout when `None` or `-`).
pub fn emit(table: &Table, command: &str, config: &RunConfig, seed: Option<u64>) -> Result<(), CliError> {
    let bytes = match config.format()? {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json(command, config, seed)?,
    };
    match config.get("output") {
        None | Some("-") => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes).and_then(|_| out.flush()).map_err(runtime)
        }
        Some(path) => std::fs::write(Path::new(path), &bytes)
            .map_err(|e| CliError::Runtime(format!("I/O error writing {path}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5e-300, -7.0, 123456789.12345679] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_quotes_model_specs() {
        let mut t = Table::new(&["theta", "model"]);
        t.push(vec![0.5.into(), "lorentzian:gamma=0.1,theta=0".into()]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "theta,model\r\n5.0000000000000000e-1,\"lorentzian:gamma=0.1,theta=0\"\r\n");
    }
}
