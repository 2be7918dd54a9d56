//! Nearest-neighbour report generation and context assembly for QA prompts.

use serde::{Deserialize, Serialize};

use crate::corpus::{Embedding, ReportCorpus};
use crate::error::{Error, Result};
use crate::vindex::{Neighbor, VectorIndex};

/// Neighbours of one query with their reports and labels, in ascending
/// distance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedContext {
    pub query_id: String,
    pub neighbors: Vec<Neighbor<f32>>,
    pub reports: Vec<String>,
    pub labels: Vec<Vec<String>>,
}

impl RetrievedContext {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

fn exclusion(query: &Embedding, exclude_self: bool) -> Vec<&str> {
    if exclude_self {
        vec![query.id.as_str()]
    } else {
        Vec::new()
    }
}

/// Top-`k` neighbours with aligned reports and labels.
pub fn retrieve_context<I: VectorIndex<f32> + ?Sized>(
    index: &I,
    corpus: &ReportCorpus,
    query: &Embedding,
    k: usize,
    exclude_self: bool,
) -> Result<RetrievedContext> {
    let neighbors = index.search(&query.vector, k, &exclusion(query, exclude_self))?;
    let mut reports = Vec::with_capacity(neighbors.len());
    let mut labels = Vec::with_capacity(neighbors.len());
    for n in &neighbors {
        let entry = corpus.get(&n.id).ok_or_else(|| {
            Error::Integrity(format!("indexed id {:?} has no report in the corpus", n.id))
        })?;
        reports.push(entry.report.clone());
        labels.push(entry.labels.clone());
    }
    Ok(RetrievedContext {
        query_id: query.id.clone(),
        neighbors,
        reports,
        labels,
    })
}

/// The nearest neighbour's report, with the neighbour as provenance.
pub fn generate_report<I: VectorIndex<f32> + ?Sized>(
    index: &I,
    corpus: &ReportCorpus,
    query: &Embedding,
    exclude_self: bool,
) -> Result<(String, Neighbor<f32>)> {
    let mut ctx = retrieve_context(index, corpus, query, 1, exclude_self)?;
    match (ctx.reports.pop(), ctx.neighbors.pop()) {
        (Some(report), Some(neighbor)) => Ok((report, neighbor)),
        _ => Err(Error::NoCandidates),
    }
}

/// Renders the context as numbered `Report n:` and `Diagnoses n:` blocks.
pub fn concat_context(ctx: &RetrievedContext) -> (String, String) {
    let reports = ctx
        .reports
        .iter()
        .enumerate()
        .map(|(i, r)| format!("Report {}: {}", i + 1, r))
        .collect::<Vec<_>>()
        .join("\n");
    let diagnoses = ctx
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let joined = if l.is_empty() { "unknown".to_string() } else { l.join(", ") };
            format!("Diagnoses {}: {}", i + 1, joined)
        })
        .collect::<Vec<_>>()
        .join("\n");
    (reports, diagnoses)
}
