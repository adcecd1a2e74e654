//! CSV and JSON serialization of report rows.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::BenchError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(BenchError::Config(format!("unknown format `{s}`"))),
        }
    }
}

/// Header of a JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub kind: String,
    /// RFC 3339 timestamp of report creation.
    pub date: String,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new<C: Serialize>(kind: &str, config: &C) -> Self {
        Metadata {
            kind: kind.to_string(),
            date: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: serde_json::to_value(config).expect("config serializes"),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, note: &str) -> Self {
        self.notes.push(note.to_string());
        self
    }
}

#[derive(Serialize)]
struct JsonReport<'a, T> {
    metadata: &'a Metadata,
    rows: &'a [T],
}

/// Writes `rows` as CSV (header plus one line per row) or as a JSON object
/// `{"metadata": ..., "rows": [...]}`.
pub fn write_report<T: Serialize, W: Write>(
    rows: &[T],
    format: Format,
    metadata: &Metadata,
    mut out: W,
) -> Result<(), BenchError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &JsonReport { metadata, rows })?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// [`write_report`] into a string.
pub fn render_report<T: Serialize>(
    rows: &[T],
    format: Format,
    metadata: &Metadata,
) -> Result<String, BenchError> {
    let mut buf = Vec::new();
    write_report(rows, format, metadata, &mut buf)?;
    Ok(String::from_utf8(buf).expect("reports are UTF-8"))
}
