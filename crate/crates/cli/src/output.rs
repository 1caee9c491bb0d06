//! CSV tables and atomic file output.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use atomirror::ScatterPoint;
use serde::Serialize;

pub const SPECTRUM_HEADER: [&str; 7] = ["delta_omega", "re_r", "im_r", "R", "phase", "T", "loss"];

/// Slack allowed when re-checking the identities of a stored row.
const ROW_TOL: f64 = 1e-9;

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// A named CSV table destined for one data file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn spectrum(name: impl Into<String>, points: &[ScatterPoint]) -> Self {
        let mut table = Self::new(name, &SPECTRUM_HEADER);
        for p in points {
            table.push(spectrum_row(p, &[]));
        }
        table
    }

    /// Spectrum rows prefixed with the given key columns.
    pub fn keyed_spectrum(name: impl Into<String>, keys: &[&str]) -> Self {
        let header: Vec<&str> = keys.iter().copied().chain(SPECTRUM_HEADER).collect();
        Self::new(name, &header)
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        out.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

pub fn spectrum_row(p: &ScatterPoint, keys: &[Cell]) -> Vec<Cell> {
    let mut row = keys.to_vec();
    row.extend([p.delta_omega, p.r.re, p.r.im, p.reflectivity, p.phase, p.transmittivity, p.loss].map(Cell::Num));
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub delta_omega: f64,
    pub re_r: f64,
    pub im_r: f64,
    pub reflectivity: f64,
    pub phase: f64,
    pub transmittivity: f64,
    pub loss: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Read(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
}

/// Reads a spectrum CSV back, checking every row against the scattering
/// identities: `R = |r|²`, `0 ≤ R, T ≤ 1`, `loss = 1 − R − T`, phase in `(−π, π]`.
pub fn read_spectrum_csv(text: &str) -> Result<Vec<SpectrumRow>, CsvError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let tail = header.len().saturating_sub(SPECTRUM_HEADER.len());
    if header.len() < SPECTRUM_HEADER.len() || header[tail..] != SPECTRUM_HEADER {
        return Err(CsvError::Header(header));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |reason: String| CsvError::Row { row: i + 1, reason };
        let vals = record
            .iter()
            .skip(tail)
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("`{f}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let row = SpectrumRow {
            delta_omega: vals[0],
            re_r: vals[1],
            im_r: vals[2],
            reflectivity: vals[3],
            phase: vals[4],
            transmittivity: vals[5],
            loss: vals[6],
        };
        row.check().map_err(bad)?;
        rows.push(row);
    }
    Ok(rows)
}

impl SpectrumRow {
    fn check(&self) -> Result<(), String> {
        let mag = self.re_r * self.re_r + self.im_r * self.im_r;
        if (mag - self.reflectivity).abs() > ROW_TOL {
            return Err(format!("R = {} but |r|² = {mag}", self.reflectivity));
        }
        for (name, x) in [("R", self.reflectivity), ("T", self.transmittivity)] {
            if !(-ROW_TOL..=1.0 + ROW_TOL).contains(&x) {
                return Err(format!("{name} = {x} outside [0, 1]"));
            }
        }
        let balance = 1.0 - self.reflectivity - self.transmittivity;
        if (balance - self.loss).abs() > ROW_TOL {
            return Err(format!("loss = {} but 1 - R - T = {balance}", self.loss));
        }
        if !(self.phase > -PI - ROW_TOL && self.phase <= PI + ROW_TOL) {
            return Err(format!("phase {} outside (-pi, pi]", self.phase));
        }
        Ok(())
    }
}

/// Writes `contents` to `path` via a sibling temporary file and a rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
