use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::jsonl::{read_jsonl, write_jsonl};
use crate::error::{Error, Result};
use crate::metrics::normalize_answer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    SingleVerify,
    SingleChoose,
    SingleQuery,
}

impl QuestionType {
    pub const ALL: [QuestionType; 3] = [
        QuestionType::SingleVerify,
        QuestionType::SingleChoose,
        QuestionType::SingleQuery,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::SingleVerify => "single_verify",
            QuestionType::SingleChoose => "single_choose",
            QuestionType::SingleQuery => "single_query",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.as_str() == s)
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaItem {
    pub id: String,
    pub qtype: QuestionType,
    pub question: String,
    #[serde(default)]
    pub options: Vec<String>,
    pub gold_answers: Vec<String>,
    pub ecg_id: String,
}

/// Raw line shape; `qtype` stays a string so unknown types produce a
/// validation error rather than a generic JSON error.
#[derive(Deserialize)]
struct RawQaItem {
    id: String,
    qtype: String,
    question: String,
    #[serde(default)]
    options: Vec<String>,
    gold_answers: Vec<String>,
    ecg_id: String,
}

impl QaItem {
    pub fn validate(&self) -> Result<()> {
        let ctx = |msg: String| Error::Validation(format!("qa item {:?}: {msg}", self.id));
        if self.gold_answers.is_empty() {
            return Err(ctx("gold_answers must be non-empty".into()));
        }
        match self.qtype {
            QuestionType::SingleVerify => {
                for g in &self.gold_answers {
                    let g = normalize_answer(g);
                    if g != "yes" && g != "no" {
                        return Err(ctx(format!("verify answer {g:?} is not yes/no")));
                    }
                }
            }
            QuestionType::SingleChoose => {
                let allowed: HashSet<String> = self
                    .options
                    .iter()
                    .map(|o| normalize_answer(o))
                    .chain(std::iter::once("none".to_string()))
                    .collect();
                for g in &self.gold_answers {
                    if !allowed.contains(&normalize_answer(g)) {
                        return Err(ctx(format!("choose answer {g:?} is not among the options")));
                    }
                }
            }
            QuestionType::SingleQuery => {}
        }
        Ok(())
    }
}

pub fn load_qa(path: impl AsRef<Path>) -> Result<Vec<QaItem>> {
    let path = path.as_ref();
    let rows: Vec<(usize, RawQaItem)> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, raw) in rows {
        let qtype = QuestionType::parse(&raw.qtype).ok_or_else(|| {
            Error::Validation(format!(
                "{}:{line}: unknown qtype {:?}",
                path.display(),
                raw.qtype
            ))
        })?;
        let item = QaItem {
            id: raw.id,
            qtype,
            question: raw.question,
            options: raw.options,
            gold_answers: raw.gold_answers,
            ecg_id: raw.ecg_id,
        };
        item.validate()?;
        if !seen.insert(item.id.clone()) {
            return Err(Error::DuplicateId(item.id));
        }
        out.push(item);
    }
    Ok(out)
}

pub fn save_qa(path: impl AsRef<Path>, items: &[QaItem]) -> Result<()> {
    write_jsonl(path.as_ref(), items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(body: &str) -> Result<Vec<QaItem>> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("qa.jsonl");
        std::fs::write(&p, body).unwrap();
        load_qa(&p)
    }

    #[test]
    fn verify_item_parses() {
        let items = load_str(
            r#"{"id":"q1","qtype":"single_verify","question":"does this ecg show afib?","options":[],"gold_answers":["yes"],"ecg_id":"e1"}"#,
        )
        .unwrap();
        assert_eq!(items[0].qtype, QuestionType::SingleVerify);
        assert_eq!(items[0].gold_answers, vec!["yes"]);
    }

    #[test]
    fn unknown_qtype_rejected() {
        let err = load_str(
            r#"{"id":"q1","qtype":"multi-verify","question":"?","options":[],"gold_answers":["yes"],"ecg_id":"e1"}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("multi-verify")));
    }

    #[test]
    fn choose_with_both_options_parses() {
        let items = load_str(
            r#"{"id":"q1","qtype":"single_choose","question":"which of afib or norm?","options":["AFIB","NORM"],"gold_answers":["AFIB","NORM"],"ecg_id":"e1"}"#,
        )
        .unwrap();
        assert_eq!(items[0].gold_answers.len(), 2);
    }

    #[test]
    fn choose_none_allowed_but_foreign_answer_rejected() {
        assert!(load_str(
            r#"{"id":"q1","qtype":"single_choose","question":"?","options":["AFIB"],"gold_answers":["none"],"ecg_id":"e1"}"#
        )
        .is_ok());
        assert!(load_str(
            r#"{"id":"q1","qtype":"single_choose","question":"?","options":["AFIB"],"gold_answers":["STACH"],"ecg_id":"e1"}"#
        )
        .is_err());
    }

    #[test]
    fn verify_gold_must_be_yes_no() {
        assert!(load_str(
            r#"{"id":"q1","qtype":"single_verify","question":"?","gold_answers":["maybe"],"ecg_id":"e1"}"#
        )
        .is_err());
    }
}
