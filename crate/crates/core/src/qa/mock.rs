use serde_json::json;

use super::{ChatRequest, LlmClient, CHOOSE_PROMPT, QUERY_PROMPT, REFINE_SYSTEM, VERIFY_PROMPT};
use crate::error::Result;
use crate::metrics::normalize_answer;

/// Leading phrases removed from a verify question to leave the attribute.
const STOP_PHRASES: &[&str] = &[
    "does this ecg show",
    "does the ecg show",
    "does this ecg have",
    "does the ecg have",
    "does this ecg",
    "does the ecg",
    "is there evidence of",
    "is there",
    "are there",
    "is this",
    "is it",
    "signs of",
    "evidence of",
    "any",
    "a",
    "an",
];

/// Deterministic offline client.
///
/// In rule mode it answers from the `Diagnoses` block of the request:
/// verify says yes when the questioned attribute equals a retrieved label,
/// choose returns every option found among the labels (or `none`), and
/// query returns the nearest neighbour's labels. Refinement requests echo
/// the draft. Fixed mode returns the same text for every request.
#[derive(Debug, Clone, Default)]
pub struct MockLlm {
    fixed: Option<String>,
}

struct Parsed {
    labels: Vec<Vec<String>>,
    question: String,
    options: Vec<String>,
}

fn parse_user(user: &str) -> Parsed {
    let mut labels = Vec::new();
    let mut question = String::new();
    let mut options = Vec::new();
    for line in user.lines() {
        if let Some(rest) = line.strip_prefix("Diagnoses ") {
            if let Some((_, list)) = rest.split_once(": ") {
                let list = list.trim();
                labels.push(if list == "unknown" {
                    Vec::new()
                } else {
                    list.split(", ").map(normalize_answer).collect()
                });
            }
        } else if let Some(q) = line.strip_prefix("Question: ") {
            question = q.to_string();
        } else if let Some(o) = line.strip_prefix("Options: ") {
            options = serde_json::from_str(o).unwrap_or_default();
        }
    }
    Parsed { labels, question, options }
}

/// The questioned attribute: the normalized question without a trailing `?`
/// and with leading stop phrases removed.
pub(crate) fn question_attribute(question: &str) -> String {
    let mut q = normalize_answer(question).trim_end_matches('?').trim().to_string();
    loop {
        let before = q.len();
        for phrase in STOP_PHRASES {
            if let Some(rest) = q.strip_prefix(phrase) {
                if rest.is_empty() || rest.starts_with(' ') {
                    q = rest.trim_start().to_string();
                }
            }
        }
        if q.len() == before {
            return q;
        }
    }
}

fn draft_of(user: &str) -> &str {
    let body = user.strip_prefix("Draft report:\n").unwrap_or(user);
    match body.rfind("\n\nRetrieved reports:\n") {
        Some(end) => &body[..end],
        None => body,
    }
}

impl MockLlm {
    pub fn rules() -> Self {
        Self { fixed: None }
    }

    pub fn fixed(text: impl Into<String>) -> Self {
        Self { fixed: Some(text.into()) }
    }

    pub fn respond(&self, request: &ChatRequest) -> String {
        if let Some(text) = &self.fixed {
            return text.clone();
        }
        if request.system == REFINE_SYSTEM {
            return draft_of(&request.user).to_string();
        }
        let p = parse_user(&request.user);
        let all_labels = || p.labels.iter().flatten();
        let answer = if request.system.contains(VERIFY_PROMPT) {
            let attr = question_attribute(&p.question);
            let hit = !attr.is_empty() && all_labels().any(|l| *l == attr);
            json!(if hit { "yes" } else { "no" })
        } else if request.system.contains(CHOOSE_PROMPT) {
            let picked: Vec<&String> = p
                .options
                .iter()
                .filter(|o| {
                    let o = normalize_answer(o);
                    all_labels().any(|l| *l == o)
                })
                .collect();
            if picked.is_empty() { json!("none") } else { json!(picked) }
        } else if request.system.contains(QUERY_PROMPT) {
            json!(p.labels.first().cloned().unwrap_or_default())
        } else {
            json!("")
        };
        json!({ "answer": answer }).to_string()
    }
}

impl LlmClient for MockLlm {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        Ok(self.respond(request))
    }
}
