use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::jsonl::{read_jsonl, write_bytes};
use super::{check_unique, EcgRecord};
use crate::error::{Error, Result};

/// One line of the signal manifest. `file` is resolved relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalManifestEntry {
    pub id: String,
    pub file: String,
    pub sample_rate_hz: f64,
}

pub fn load_signals(manifest_path: impl AsRef<Path>) -> Result<Vec<EcgRecord>> {
    let manifest_path = manifest_path.as_ref();
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let rows: Vec<(usize, SignalManifestEntry)> = read_jsonl(manifest_path)?;
    check_unique(rows.iter().map(|(_, e)| e.id.as_str()))?;
    rows.into_iter()
        .map(|(_, entry)| {
            if !(entry.sample_rate_hz.is_finite() && entry.sample_rate_hz > 0.0) {
                return Err(Error::Validation(format!(
                    "record {:?}: sample_rate_hz must be positive, got {}",
                    entry.id, entry.sample_rate_hz
                )));
            }
            let path: PathBuf = base.join(&entry.file);
            let (signal, n_leads) = read_signal_csv(&path)?;
            EcgRecord::new(entry.id, signal, n_leads, entry.sample_rate_hz)
        })
        .collect()
}

/// Parses a headerless numeric CSV into a row-major matrix. Returns the
/// values and the column count. Numbers always use '.' as the decimal mark.
pub(crate) fn read_signal_csv(path: &Path) -> Result<(Vec<f32>, usize)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut row = 0usize;
    for (line_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        row += 1;
        let mut cols = 0usize;
        for (col, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let v: f32 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_idx + 1,
                message: format!("row {row}, column {}: not a number: {cell:?}", col + 1),
            })?;
            values.push(v);
            cols += 1;
        }
        match width {
            None => width = Some(cols),
            Some(w) if w != cols => {
                return Err(Error::Shape(format!(
                    "{}: row {row} has {cols} columns, expected {w}",
                    path.display()
                )))
            }
            _ => {}
        }
    }
    match width {
        Some(w) => Ok((values, w)),
        None => Err(Error::Shape(format!("{}: no samples", path.display()))),
    }
}

/// Writes a record's signal as headerless CSV. Values use the shortest
/// representation that parses back to the same `f32`.
pub fn write_signal_csv(path: impl AsRef<Path>, record: &EcgRecord) -> Result<()> {
    let mut text = String::with_capacity(record.signal.len() * 8);
    for row in record.signal.chunks_exact(record.n_leads) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            let _ = write!(text, "{v}");
        }
        text.push('\n');
    }
    write_bytes(path.as_ref(), text.as_bytes())
}
