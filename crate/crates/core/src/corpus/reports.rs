use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::jsonl::{read_jsonl, write_jsonl};
use crate::error::{Error, Result};

/// Report text and diagnoses labels for one corpus record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    pub report: String,
    #[serde(default)]
    pub labels: Vec<String>,
}

/// Loads a reports JSONL file, preserving file order.
pub fn load_reports(path: impl AsRef<Path>) -> Result<Vec<ReportEntry>> {
    let path = path.as_ref();
    let rows: Vec<(usize, ReportEntry)> = read_jsonl(path)?;
    let mut seen = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, entry) in rows {
        if entry.id.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "empty id".into(),
            });
        }
        if entry.report.trim().is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("record {:?} has an empty report", entry.id),
            });
        }
        if seen.insert(entry.id.clone(), line).is_some() {
            return Err(Error::DuplicateId(entry.id));
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn save_reports(path: impl AsRef<Path>, entries: &[ReportEntry]) -> Result<()> {
    write_jsonl(path.as_ref(), entries)
}

/// Reports addressable by id, keeping the original order for iteration.
#[derive(Debug, Clone, Default)]
pub struct ReportCorpus {
    entries: Vec<ReportEntry>,
    by_id: HashMap<String, usize>,
}

impl ReportCorpus {
    pub fn new(entries: Vec<ReportEntry>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if by_id.insert(e.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        Ok(Self { entries, by_id })
    }

    pub fn get(&self, id: &str) -> Option<&ReportEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn entries(&self) -> &[ReportEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let p = dir.path().join("reports.jsonl");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn single_line_maps_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, r#"{"id":"a","report":"sinus rhythm","labels":["NORM"]}"#);
        let entries = load_reports(&p).unwrap();
        assert_eq!(
            entries,
            vec![ReportEntry {
                id: "a".into(),
                report: "sinus rhythm".into(),
                labels: vec!["NORM".into()],
            }]
        );
    }

    #[test]
    fn empty_file_is_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "");
        assert!(load_reports(&p).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "{\"id\":\"a\",\"report\":\"x\",\"labels\":[]}\n{\"id\":\"a\",\"report\":\"y\",\"labels\":[]}\n",
        );
        match load_reports(&p) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "a"),
            other => panic!("expected duplicate id, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "{\"id\":\"a\",\"report\":\"x\",\"labels\":[]}\n{\"id\":\"b\",\n",
        );
        match load_reports(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let entries = vec![
            ReportEntry {
                id: "a".into(),
                report: "sinus rhythm".into(),
                labels: vec![],
            },
            ReportEntry {
                id: "b".into(),
                report: "atrial fibrillation".into(),
                labels: vec!["AFIB".into()],
            },
        ];
        save_reports(&p, &entries).unwrap();
        assert_eq!(load_reports(&p).unwrap(), entries);
    }
}
