use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::QuestionType;
use crate::metrics::{NlgScores, SentenceBleu};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScores {
    pub name: String,
    pub scores: NlgScores,
    pub sentence_bleu: SentenceBleu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationEval {
    pub n_queries: usize,
    pub exclude_self: bool,
    pub refined: bool,
    /// Fraction of queries whose retrieved neighbour has the query's label set.
    pub label_match_rate: f64,
    pub methods: Vec<MethodScores>,
}

impl GenerationEval {
    pub fn method(&self, name: &str) -> Option<&MethodScores> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QaTypeStats {
    pub total: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub skipped: usize,
    /// `correct / (correct + incorrect)`, 0 when nothing was evaluated.
    pub accuracy: f64,
}

impl QaTypeStats {
    pub fn record(&mut self, outcome: Option<bool>) {
        self.total += 1;
        match outcome {
            Some(true) => self.correct += 1,
            Some(false) => self.incorrect += 1,
            None => self.skipped += 1,
        }
        let evaluated = self.correct + self.incorrect;
        self.accuracy = if evaluated == 0 { 0.0 } else { self.correct as f64 / evaluated as f64 };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaMethod {
    pub name: String,
    pub per_type: BTreeMap<QuestionType, QaTypeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaEval {
    pub n_items: usize,
    pub methods: Vec<QaMethod>,
}

impl QaEval {
    pub fn method(&self, name: &str) -> Option<&QaMethod> {
        self.methods.iter().find(|m| m.name == name)
    }
}

/// Identifies the run. Wall-clock times live in `runs.jsonl`, not here, so
/// that reruns produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generation: Option<GenerationEval>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub qa: Option<QaEval>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn row(out: &mut String, name: &str, cells: &[String]) {
    let _ = write!(out, "{name:<22}");
    for c in cells {
        let _ = write!(out, " {c:>10}");
    }
    out.push('\n');
}

/// Aligned plain-text rendering of an [`EvalReport`].
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "config {}  seed {}",
        &report.provenance.config_hash[..report.provenance.config_hash.len().min(12)],
        report.provenance.seed
    );
    if let Some(g) = &report.generation {
        let _ = writeln!(
            out,
            "\nReport generation: {} queries, exclude_self={}, refined={}, top-1 label match {:.6}",
            g.n_queries, g.exclude_self, g.refined, g.label_match_rate
        );
        let head = ["BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-L", "METEOR"];
        row(&mut out, "method", &head.map(String::from));
        for m in &g.methods {
            let s = &m.scores;
            let vals = [s.bleu1, s.bleu2, s.bleu3, s.bleu4, s.rouge_l, s.meteor];
            row(&mut out, &m.name, &vals.map(|v| cell(Some(v))));
        }
        for m in &g.methods {
            let b = &m.sentence_bleu;
            let vals = [Some(b.bleu1), Some(b.bleu2), Some(b.bleu3), Some(b.bleu4), None, None];
            row(&mut out, &format!("{} (sentence)", m.name), &vals.map(cell));
        }
    }
    if let Some(q) = &report.qa {
        let _ = writeln!(out, "\nQuestion answering: {} items (exact-match accuracy)", q.n_items);
        let head = ["S-Verify", "S-Choose", "S-Query", "skipped"];
        row(&mut out, "method", &head.map(String::from));
        for m in &q.methods {
            let mut cells: Vec<String> = QuestionType::ALL
                .iter()
                .map(|t| cell(m.per_type.get(t).map(|s| s.accuracy)))
                .collect();
            cells.push(m.per_type.values().map(|s| s.skipped).sum::<usize>().to_string());
            row(&mut out, &m.name, &cells);
        }
    }
    out
}
