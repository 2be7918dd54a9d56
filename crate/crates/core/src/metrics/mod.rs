//! Text and answer scoring: corpus BLEU, ROUGE-L, METEOR-lite and exact match.
//!
//! All NLG metrics work on [`TokenSeq`] values produced by [`tokenize`]. Corpus
//! means are summed in sorted order so that reordering the input pairs cannot
//! change the last bits of a score.

mod bleu;
mod meteor;
mod porter;
mod rouge;
mod tokenize;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bleu::{bleu, sentence_bleu, MAX_ORDER};
pub use meteor::{align, count_chunks, meteor_from_counts, meteor_lite, Alignment, MatchStage};
pub use porter::porter_stem;
pub use rouge::{lcs_len, rouge_l};
pub use tokenize::{tokenize, TokenSeq, PUNCTUATION};

/// Trims, lowercases and collapses internal whitespace.
pub fn normalize_answer(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// 1 when the normalized answer sets are equal, else 0. Blank entries are
/// ignored, so an empty prediction never matches a non-empty gold set.
pub fn exact_match<S: AsRef<str>, G: AsRef<str>>(predicted: &[S], gold: &[G]) -> u8 {
    let set = |xs: &mut dyn Iterator<Item = &str>| -> BTreeSet<String> {
        xs.map(normalize_answer).filter(|s| !s.is_empty()).collect()
    };
    let p = set(&mut predicted.iter().map(AsRef::as_ref));
    let g = set(&mut gold.iter().map(AsRef::as_ref));
    u8::from(!g.is_empty() && p == g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlgScores {
    pub bleu1: f64,
    pub bleu2: f64,
    pub bleu3: f64,
    pub bleu4: f64,
    pub rouge_l: f64,
    pub meteor: f64,
}

impl NlgScores {
    pub fn bleu(&self, n: usize) -> f64 {
        match n {
            1 => self.bleu1,
            2 => self.bleu2,
            3 => self.bleu3,
            4 => self.bleu4,
            _ => panic!("bleu order {n} out of range"),
        }
    }
}

/// Mean sentence-level BLEU with add-one smoothing for orders two and up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceBleu {
    pub bleu1: f64,
    pub bleu2: f64,
    pub bleu3: f64,
    pub bleu4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlgEval {
    /// Corpus BLEU, mean ROUGE-L and mean METEOR-lite.
    pub corpus: NlgScores,
    pub sentence_bleu: SentenceBleu,
}

/// Arithmetic mean summed in ascending order; 0 for an empty slice.
pub fn stable_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Scores tokenized candidate/reference pairs.
pub fn score_tokens(candidates: &[TokenSeq], references: &[TokenSeq]) -> Result<NlgEval> {
    if candidates.len() != references.len() {
        return Err(Error::Validation(format!(
            "{} candidates but {} references",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::Validation("nothing to score".into()));
    }
    let per_pair: Vec<[f64; 6]> = candidates
        .par_iter()
        .zip(references.par_iter())
        .map(|(c, r)| {
            let mut s = [0.0; 6];
            for n in 1..=MAX_ORDER {
                s[n - 1] = sentence_bleu(c, r, n).expect("order in range");
            }
            s[4] = rouge_l(c, r);
            s[5] = meteor_lite(c, r);
            s
        })
        .collect();
    let column = |i: usize| stable_mean(&per_pair.iter().map(|s| s[i]).collect::<Vec<_>>());
    Ok(NlgEval {
        corpus: NlgScores {
            bleu1: bleu(candidates, references, 1)?,
            bleu2: bleu(candidates, references, 2)?,
            bleu3: bleu(candidates, references, 3)?,
            bleu4: bleu(candidates, references, 4)?,
            rouge_l: column(4),
            meteor: column(5),
        },
        sentence_bleu: SentenceBleu {
            bleu1: column(0),
            bleu2: column(1),
            bleu3: column(2),
            bleu4: column(3),
        },
    })
}

/// Tokenizes and scores raw report strings.
pub fn score_texts<C: AsRef<str>, R: AsRef<str>>(candidates: &[C], references: &[R]) -> Result<NlgEval> {
    let c: Vec<TokenSeq> = candidates.iter().map(|s| tokenize(s.as_ref())).collect();
    let r: Vec<TokenSeq> = references.iter().map(|s| tokenize(s.as_ref())).collect();
    score_tokens(&c, &r)
}
