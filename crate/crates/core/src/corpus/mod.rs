//! Records, embeddings, reports and QA items, plus their on-disk formats.
//!
//! * reports, QA items and the signal manifest are JSONL;
//! * signals are headerless CSV (one row per time step, one column per lead);
//! * embeddings use a little-endian binary matrix with an `.ids` sidecar,
//!   see [`embeddings`].

pub mod embeddings;
pub(crate) mod jsonl;
mod qa;
mod reports;
mod signals;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use embeddings::{load_embeddings, save_embeddings, EmbeddingSet};
pub use qa::{load_qa, save_qa, QaItem, QuestionType};
pub use reports::{load_reports, save_reports, ReportCorpus, ReportEntry};
pub use signals::{load_signals, write_signal_csv, SignalManifestEntry};

/// One multi-lead ECG: `n_samples` time steps by `n_leads` leads, stored
/// row-major (`signal[t * n_leads + lead]`), in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecord {
    pub id: String,
    pub signal: Vec<f32>,
    pub n_samples: usize,
    pub n_leads: usize,
    pub sample_rate_hz: f64,
}

impl EcgRecord {
    pub fn new(
        id: impl Into<String>,
        signal: Vec<f32>,
        n_leads: usize,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Validation("record id must be non-empty".into()));
        }
        if n_leads == 0 {
            return Err(Error::Shape(format!("record {id:?}: lead count must be >= 1")));
        }
        if signal.is_empty() || !signal.len().is_multiple_of(n_leads) {
            return Err(Error::Shape(format!(
                "record {id:?}: {} samples do not form a non-empty matrix with {n_leads} leads",
                signal.len()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Validation(format!(
                "record {id:?}: sample_rate_hz must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(pos) = signal.iter().position(|x| !x.is_finite()) {
            return Err(Error::Validation(format!(
                "record {id:?}: non-finite sample at row {}, lead {}",
                pos / n_leads,
                pos % n_leads
            )));
        }
        let n_samples = signal.len() / n_leads;
        Ok(Self {
            id,
            signal,
            n_samples,
            n_leads,
            sample_rate_hz,
        })
    }

    /// Copies one lead out of the interleaved matrix.
    pub fn lead(&self, lead: usize) -> Vec<f32> {
        self.signal
            .iter()
            .skip(lead)
            .step_by(self.n_leads)
            .copied()
            .collect()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate_hz
    }
}

/// A `d`-dimensional embedding keyed by record id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub id: String,
    pub vector: Vec<f32>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Checks that every id in `ids` names a known record, reporting the first
/// offender.
pub fn cross_validate<'a>(
    known: &HashSet<&str>,
    ids: impl IntoIterator<Item = &'a str>,
    what: &str,
) -> Result<()> {
    for id in ids {
        if !known.contains(id) {
            return Err(Error::Integrity(format!(
                "{what} id {id:?} has no matching record"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_unique<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(())
}
