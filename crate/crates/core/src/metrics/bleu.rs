use std::collections::HashMap;

use super::TokenSeq;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

/// Clipped matches and candidate/reference n-gram totals for one order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct OrderCounts {
    clipped: u64,
    cand_total: u64,
    ref_total: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct PairCounts {
    orders: [OrderCounts; MAX_ORDER],
    cand_len: u64,
    ref_len: u64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn pair_counts(cand: &TokenSeq, reference: &TokenSeq, max_n: usize) -> PairCounts {
    let mut out = PairCounts {
        cand_len: cand.len() as u64,
        ref_len: reference.len() as u64,
        ..Default::default()
    };
    for n in 1..=max_n {
        let c = ngram_counts(cand.tokens(), n);
        let r = ngram_counts(reference.tokens(), n);
        let clipped = c
            .iter()
            .map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0)))
            .sum();
        out.orders[n - 1] = OrderCounts {
            clipped,
            cand_total: cand.len().saturating_sub(n - 1) as u64,
            ref_total: reference.len().saturating_sub(n - 1) as u64,
        };
    }
    out
}

fn check_order(max_n: usize) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&max_n) {
        return Err(Error::Validation(format!("BLEU order must be 1..=4, got {max_n}")));
    }
    Ok(())
}

fn brevity_penalty(c: u64, r: u64) -> f64 {
    if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Precision for one order. An order with no n-grams on either side is
/// vacuous and counts as 1.
fn precision(o: &OrderCounts, smooth: bool) -> f64 {
    if o.cand_total == 0 && o.ref_total == 0 {
        return 1.0;
    }
    if smooth {
        (o.clipped + 1) as f64 / (o.cand_total + 1) as f64
    } else if o.cand_total == 0 {
        0.0
    } else {
        o.clipped as f64 / o.cand_total as f64
    }
}

fn combine(orders: &[OrderCounts], c: u64, r: u64, max_n: usize, smooth_from: usize) -> f64 {
    if c == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (i, o) in orders.iter().take(max_n).enumerate() {
        let p = precision(o, i + 1 >= smooth_from);
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    brevity_penalty(c, r) * (log_sum / max_n as f64).exp()
}

/// Corpus BLEU: n-gram matches and lengths pooled over all pairs, uniform
/// weights over orders `1..=max_n`, no smoothing.
pub fn bleu(candidates: &[TokenSeq], references: &[TokenSeq], max_n: usize) -> Result<f64> {
    check_order(max_n)?;
    if candidates.len() != references.len() || candidates.is_empty() {
        return Err(Error::Validation(format!(
            "BLEU needs equal, non-zero counts: {} candidates vs {} references",
            candidates.len(),
            references.len()
        )));
    }
    let mut pooled = [OrderCounts::default(); MAX_ORDER];
    let (mut c, mut r) = (0u64, 0u64);
    for (cand, reference) in candidates.iter().zip(references) {
        let p = pair_counts(cand, reference, max_n);
        c += p.cand_len;
        r += p.ref_len;
        for (acc, o) in pooled.iter_mut().zip(&p.orders) {
            acc.clipped += o.clipped;
            acc.cand_total += o.cand_total;
            acc.ref_total += o.ref_total;
        }
    }
    Ok(combine(&pooled, c, r, max_n, usize::MAX))
}

/// Sentence BLEU with add-one smoothing on orders `n >= 2`.
pub fn sentence_bleu(candidate: &TokenSeq, reference: &TokenSeq, max_n: usize) -> Result<f64> {
    check_order(max_n)?;
    let p = pair_counts(candidate, reference, max_n);
    Ok(combine(&p.orders, p.cand_len, p.ref_len, max_n, 2))
}
