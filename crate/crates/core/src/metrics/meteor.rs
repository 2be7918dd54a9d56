//! Unigram-alignment METEOR with exact and Porter-stem matching only.

use super::porter::porter_stem;
use super::TokenSeq;

pub const ALPHA: f64 = 0.9;
pub const BETA: f64 = 3.0;
pub const GAMMA: f64 = 0.5;

/// Search budget for chunk minimisation. Small inputs are always searched
/// exhaustively; past the budget the best alignment found so far is used.
const NODE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchStage {
    Exact,
    Stem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// `(candidate position, reference position, stage)`, ascending by candidate.
    pub pairs: Vec<(usize, usize, MatchStage)>,
    pub chunks: usize,
}

impl Alignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }
}

/// Counts chunks of an alignment sorted by candidate position: a pair extends
/// the current chunk only if it directly follows the previous pair on both
/// sides.
pub fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(i, j) in pairs {
        match prev {
            Some((pi, pj)) if i == pi + 1 && j == pj + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((i, j));
    }
    chunks
}

struct Search {
    /// Match class of every candidate / reference token (equal stems share a class).
    cand_class: Vec<usize>,
    ref_by_class: Vec<Vec<usize>>,
    /// Candidate tokens of each class at positions `>= i`.
    cand_left: Vec<Vec<usize>>,
    used: Vec<bool>,
    need: Vec<usize>,
    current: Vec<(usize, usize)>,
    best: Option<(usize, Vec<(usize, usize)>)>,
    nodes: usize,
}

impl Search {
    fn run(&mut self, i: usize, chunks: usize) {
        self.nodes += 1;
        if let Some((best, _)) = &self.best {
            if chunks >= *best && !self.current.is_empty() {
                return;
            }
        }
        if i == self.cand_class.len() || self.need.iter().all(|&n| n == 0) {
            if self.best.as_ref().is_none_or(|(b, _)| chunks < *b) {
                self.best = Some((chunks, self.current.clone()));
            }
            return;
        }
        let class = self.cand_class[i];
        let continues = self.current.last().filter(|&&(pi, _)| pi + 1 == i).map(|&(_, pj)| pj + 1);

        if class != usize::MAX && self.need[class] > 0 {
            let mut options: Vec<usize> = self.ref_by_class[class]
                .iter()
                .copied()
                .filter(|&j| !self.used[j])
                .collect();
            if let Some(c) = continues {
                if let Some(pos) = options.iter().position(|&j| j == c) {
                    options.remove(pos);
                    options.insert(0, c);
                }
            }
            for j in options {
                if self.nodes > NODE_BUDGET && self.best.is_some() {
                    return;
                }
                let extra = usize::from(continues != Some(j));
                self.used[j] = true;
                self.need[class] -= 1;
                self.current.push((i, j));
                self.run(i + 1, chunks + extra);
                self.current.pop();
                self.need[class] += 1;
                self.used[j] = false;
            }
        }
        // Leaving token i unmatched is allowed only if later tokens of its
        // class can still cover what the class needs.
        let can_skip = class == usize::MAX
            || self.need[class] == 0
            || self.cand_left[i + 1][class] >= self.need[class];
        if can_skip && !(self.nodes > NODE_BUDGET && self.best.is_some()) {
            self.run(i + 1, chunks);
        }
    }
}

/// Maximum-match alignment with the fewest chunks. Tokens align when their
/// Porter stems agree (which includes exact matches); each pair is labelled
/// with the stage that produced it.
pub fn align(candidate: &TokenSeq, reference: &TokenSeq) -> Alignment {
    let cand = candidate.tokens();
    let refs = reference.tokens();
    let cand_stems: Vec<String> = cand.iter().map(|t| porter_stem(t)).collect();
    let ref_stems: Vec<String> = refs.iter().map(|t| porter_stem(t)).collect();

    let mut classes: Vec<&str> = Vec::new();
    let class_of = |s: &str, classes: &Vec<&str>| classes.iter().position(|c| *c == s);
    let mut ref_class = Vec::with_capacity(refs.len());
    for s in &ref_stems {
        let c = match class_of(s, &classes) {
            Some(c) => c,
            None => {
                classes.push(s);
                classes.len() - 1
            }
        };
        ref_class.push(c);
    }
    let cand_class: Vec<usize> = cand_stems
        .iter()
        .map(|s| class_of(s, &classes).unwrap_or(usize::MAX))
        .collect();

    let n_classes = classes.len();
    let mut ref_by_class = vec![Vec::new(); n_classes];
    for (j, &c) in ref_class.iter().enumerate() {
        ref_by_class[c].push(j);
    }
    let mut cand_left = vec![vec![0usize; n_classes]; cand.len() + 1];
    for i in (0..cand.len()).rev() {
        cand_left[i] = cand_left[i + 1].clone();
        if cand_class[i] != usize::MAX {
            cand_left[i][cand_class[i]] += 1;
        }
    }
    let need: Vec<usize> = (0..n_classes)
        .map(|c| cand_left[0][c].min(ref_by_class[c].len()))
        .collect();

    let mut search = Search {
        cand_class,
        ref_by_class,
        cand_left,
        used: vec![false; refs.len()],
        need,
        current: Vec::new(),
        best: None,
        nodes: 0,
    };
    search.run(0, 0);
    let (chunks, pairs) = search.best.unwrap_or((0, Vec::new()));
    Alignment {
        pairs: pairs
            .into_iter()
            .map(|(i, j)| {
                let stage = if cand[i] == refs[j] {
                    MatchStage::Exact
                } else {
                    MatchStage::Stem
                };
                (i, j, stage)
            })
            .collect(),
        chunks,
    }
}

/// Score from match count, chunk count and the two lengths.
pub fn meteor_from_counts(matches: usize, chunks: usize, cand_len: usize, ref_len: usize) -> f64 {
    if matches == 0 {
        return 0.0;
    }
    let m = matches as f64;
    let p = m / cand_len as f64;
    let r = m / ref_len as f64;
    let fmean = p * r / (ALPHA * p + (1.0 - ALPHA) * r);
    let penalty = GAMMA * (chunks as f64 / m).powf(BETA);
    fmean * (1.0 - penalty)
}

pub fn meteor_lite(candidate: &TokenSeq, reference: &TokenSeq) -> f64 {
    let a = align(candidate, reference);
    meteor_from_counts(a.matches(), a.chunks, candidate.len(), reference.len())
}
