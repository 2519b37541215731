//! Scan results and their CSV / JSON encodings.
//!
//! CSV files start with `# key = value` metadata lines (values are JSON),
//! followed by a header row and one record per row. Numbers are written with
//! 17 significant digits so they round-trip exactly. Nothing time-dependent is
//! written, so identical runs give byte-identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::Format;
use crate::error::{GcsError, Result};
use crate::wigner::WignerField;

pub type Metadata = BTreeMap<String, Value>;

pub const TOOL: &str = "gcs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub epsilon: Option<f64>,
    pub p: Option<f64>,
    pub tau: Option<f64>,
    pub rescaled_tau: Option<f64>,
    pub quantity: String,
    pub value: Option<f64>,
    pub error: Option<String>,
}

impl Row {
    pub fn value(quantity: &str, value: f64) -> Self {
        Self {
            epsilon: None,
            p: None,
            tau: None,
            rescaled_tau: None,
            quantity: quantity.to_owned(),
            value: Some(value),
            error: None,
        }
    }

    pub fn failed(quantity: &str, error: &GcsError) -> Self {
        Self {
            value: None,
            error: Some(error.to_string()),
            ..Self::value(quantity, 0.0)
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_tau(mut self, tau: f64, rescaled: Option<f64>) -> Self {
        self.tau = Some(tau);
        self.rescaled_tau = rescaled;
        self
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

const HEADER: [&str; 7] = ["epsilon", "p", "tau", "rescaled_tau", "quantity", "value", "error"];

/// `{:.16e}`: 17 significant digits, shortest form that always round-trips.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScanResult {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
}

impl ScanResult {
    pub fn new(metadata: Metadata, rows: Vec<Row>) -> Self {
        Self { metadata, rows }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.is_error())
    }

    pub fn select<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write_metadata_lines(&mut out, &self.metadata)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for r in &self.rows {
            w.write_record([
                opt(r.epsilon),
                opt(r.p),
                opt(r.tau),
                opt(r.rescaled_tau),
                r.quantity.clone(),
                opt(r.value),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn to_string(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, format).expect("writing to memory");
        String::from_utf8(buf).expect("output is UTF-8")
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        let file = create(path)?;
        let mut out = BufWriter::new(file);
        self.write(&mut out, format)
            .and_then(|_| out.flush())
            .map_err(|e| GcsError::io(path, e))
    }
}

fn write_metadata_lines<W: Write>(out: &mut W, metadata: &Metadata) -> std::io::Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k} = {v}")?;
    }
    Ok(())
}

pub(crate) fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| GcsError::io(dir, e))?;
    }
    File::create(path).map_err(|e| GcsError::io(path, e))
}

/// Serialized form of one Wigner frame.
#[derive(Serialize)]
struct FrameJson<'a> {
    metadata: &'a Metadata,
    grid: &'a crate::wigner::PhaseGrid,
    values: &'a [f64],
}

/// Writes a sampled field. CSV has one `x,y,w` record per grid point in
/// row-major order; JSON is `{metadata, grid: {L, nx, ny}, values}`.
pub fn write_frame<W: Write>(mut out: W, field: &WignerField, metadata: &Metadata, format: Format) -> std::io::Result<()> {
    let mut metadata = metadata.clone();
    metadata.insert("min".into(), field.min().into());
    metadata.insert("max".into(), field.max().into());
    match format {
        Format::Json => {
            let frame = FrameJson {
                metadata: &metadata,
                grid: &field.grid,
                values: &field.values,
            };
            serde_json::to_writer(&mut out, &frame)?;
            writeln!(out)
        }
        Format::Csv => {
            write_metadata_lines(&mut out, &metadata)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["x", "y", "w"])?;
            let g = &field.grid;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    w.write_record([format_number(g.x(i)), format_number(g.y(j)), format_number(field.at(i, j))])?;
                }
            }
            w.flush()
        }
    }
}

/// Reads back the rows of a CSV written by [`ScanResult::write_csv`],
/// skipping metadata lines.
pub fn read_csv_rows(path: &Path) -> Result<Vec<BTreeMap<String, String>>> {
    let file = File::open(path).map_err(|e| GcsError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = r.headers().map_err(|e| csv_error(path, e))?.clone();
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            Ok(headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_owned(), v.to_owned())).collect())
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> GcsError {
    GcsError::io(PathBuf::from(path), std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
