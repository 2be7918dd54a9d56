use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{QaItem, QuestionType, ReportCorpus};
use crate::error::{Error, Result};
use crate::metrics::normalize_answer;

/// One uniformly drawn corpus report per query, reproducible from `seed`.
pub fn baseline_random(corpus: &ReportCorpus, n_queries: usize, seed: u64) -> Result<Vec<String>> {
    if corpus.is_empty() {
        return Err(Error::Validation("random baseline needs a non-empty corpus".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = corpus.entries();
    Ok((0..n_queries)
        .map(|_| entries[rng.random_range(0..entries.len())].report.clone())
        .collect())
}

/// The most frequent report string, lexicographically smallest on ties.
pub fn most_common_report(corpus: &ReportCorpus) -> Result<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in corpus.entries() {
        *counts.entry(e.report.as_str()).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(r, _)| r.to_string())
        .ok_or_else(|| Error::Validation("common baseline needs a non-empty corpus".into()))
}

pub fn baseline_common(corpus: &ReportCorpus, n_queries: usize) -> Result<Vec<String>> {
    let r = most_common_report(corpus)?;
    Ok(vec![r; n_queries])
}

fn answer_set(answers: &[String]) -> Vec<String> {
    let mut set: Vec<String> = answers
        .iter()
        .map(|a| normalize_answer(a))
        .filter(|a| !a.is_empty())
        .collect();
    set.sort();
    set.dedup();
    set
}

/// Per question type, the most frequent normalized gold answer set in
/// `train` (smallest set in lexicographic order on ties), predicted for every
/// `test` item of that type.
pub fn baseline_majority_qa(train: &[QaItem], test: &[QaItem]) -> Result<Vec<Vec<String>>> {
    let mut counts: BTreeMap<QuestionType, BTreeMap<Vec<String>, usize>> = BTreeMap::new();
    for item in train {
        *counts
            .entry(item.qtype)
            .or_default()
            .entry(answer_set(&item.gold_answers))
            .or_default() += 1;
    }
    let majority: BTreeMap<QuestionType, Vec<String>> = counts
        .into_iter()
        .map(|(q, sets)| {
            // BTreeMap iterates sets in ascending order, so the first maximum wins ties.
            let best = sets
                .into_iter()
                .fold((Vec::new(), 0usize), |acc, (s, c)| if c > acc.1 { (s, c) } else { acc });
            (q, best.0)
        })
        .collect();
    test.iter()
        .map(|item| {
            majority.get(&item.qtype).cloned().ok_or_else(|| {
                Error::Validation(format!(
                    "majority baseline: no training items of type {} (test item {:?})",
                    item.qtype, item.id
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ReportEntry;

    fn corpus(reports: &[&str]) -> ReportCorpus {
        ReportCorpus::new(
            reports
                .iter()
                .enumerate()
                .map(|(i, r)| ReportEntry { id: format!("r{i}"), report: r.to_string(), labels: vec![] })
                .collect(),
        )
        .unwrap()
    }

    fn qa(id: &str, qtype: QuestionType, gold: &[&str]) -> QaItem {
        QaItem {
            id: id.into(),
            qtype,
            question: "q?".into(),
            options: vec![],
            gold_answers: gold.iter().map(|s| s.to_string()).collect(),
            ecg_id: "e".into(),
        }
    }

    #[test]
    fn common_and_ties() {
        assert_eq!(baseline_common(&corpus(&["A", "A", "B"]), 2).unwrap(), ["A", "A"]);
        assert_eq!(most_common_report(&corpus(&["B", "A"])).unwrap(), "A");
        assert_eq!(most_common_report(&corpus(&["B", "B", "A", "C", "C"])).unwrap(), "B");
        assert!(most_common_report(&corpus(&[])).is_err());
    }

    #[test]
    fn random_is_seeded() {
        let c = corpus(&["a", "b", "c", "d"]);
        assert_eq!(baseline_random(&c, 20, 5).unwrap(), baseline_random(&c, 20, 5).unwrap());
        assert_ne!(baseline_random(&c, 20, 5).unwrap(), baseline_random(&c, 20, 6).unwrap());
        assert_eq!(baseline_random(&corpus(&["only"]), 3, 1).unwrap(), ["only"; 3]);
    }

    #[test]
    fn majority_per_type() {
        let v = QuestionType::SingleVerify;
        let train = vec![
            qa("1", v, &["yes"]),
            qa("2", v, &["Yes"]),
            qa("3", v, &["yes"]),
            qa("4", v, &["no"]),
            qa("5", QuestionType::SingleQuery, &["b", "a"]),
            qa("6", QuestionType::SingleQuery, &["c"]),
        ];
        let test = vec![qa("t1", v, &["no"]), qa("t2", QuestionType::SingleQuery, &["a"])];
        let pred = baseline_majority_qa(&train, &test).unwrap();
        assert_eq!(pred[0], ["yes"]);
        assert_eq!(pred[1], ["a", "b"]);
        let unseen = vec![qa("t3", QuestionType::SingleChoose, &["none"])];
        assert!(baseline_majority_qa(&train, &unseen).is_err());
    }
}
