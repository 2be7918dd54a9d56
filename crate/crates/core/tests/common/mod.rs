//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use ecg_regen::metrics::{porter_stem, TokenSeq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Corpus BLEU by direct n-gram enumeration: counts come from linear scans
/// rather than hash maps.
pub fn naive_bleu(cands: &[Vec<String>], refs: &[Vec<String>], max_n: usize) -> f64 {
    let grams = |t: &[String], n: usize| -> Vec<Vec<String>> {
        if t.len() < n {
            return Vec::new();
        }
        (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
    };
    let mut clipped = vec![0usize; max_n];
    let mut cand_total = vec![0usize; max_n];
    let mut ref_total = vec![0usize; max_n];
    let (mut c, mut r) = (0usize, 0usize);
    for (cand, reference) in cands.iter().zip(refs) {
        c += cand.len();
        r += reference.len();
        for n in 1..=max_n {
            let cg = grams(cand, n);
            let rg = grams(reference, n);
            cand_total[n - 1] += cg.len();
            ref_total[n - 1] += rg.len();
            let mut seen: Vec<&Vec<String>> = Vec::new();
            for g in &cg {
                if seen.contains(&g) {
                    continue;
                }
                seen.push(g);
                let in_c = cg.iter().filter(|x| *x == g).count();
                let in_r = rg.iter().filter(|x| *x == g).count();
                clipped[n - 1] += in_c.min(in_r);
            }
        }
    }
    if c == 0 {
        return 0.0;
    }
    let mut log_p = 0.0;
    for n in 0..max_n {
        let p = if cand_total[n] == 0 && ref_total[n] == 0 {
            1.0
        } else if cand_total[n] == 0 {
            0.0
        } else {
            clipped[n] as f64 / cand_total[n] as f64
        };
        if p == 0.0 {
            return 0.0;
        }
        log_p += p.ln() / max_n as f64;
    }
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * log_p.exp()
}

/// LCS length by the quadratic table.
pub fn naive_lcs(a: &[String], b: &[String]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

pub fn naive_rouge_l(a: &[String], b: &[String]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let l = naive_lcs(a, b) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let (p, r) = (l / a.len() as f64, l / b.len() as f64);
    2.0 * p * r / (p + r)
}

/// Enumerates every one-to-one alignment of stem-equal tokens and returns
/// `(matches, chunks)` with the most matches and, among those, fewest chunks.
pub fn brute_force_alignment(cand: &[String], reference: &[String]) -> (usize, usize) {
    let cs: Vec<String> = cand.iter().map(|t| porter_stem(t)).collect();
    let rs: Vec<String> = reference.iter().map(|t| porter_stem(t)).collect();
    let mut best = (0usize, 0usize);
    let mut used = vec![false; reference.len()];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    fn chunks(pairs: &[(usize, usize)]) -> usize {
        let mut n = 0;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if k == 0 || !(pairs[k - 1].0 + 1 == i && pairs[k - 1].1 + 1 == j) {
                n += 1;
            }
        }
        n
    }
    fn rec(
        i: usize,
        cs: &[String],
        rs: &[String],
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize)>,
        best: &mut (usize, usize),
    ) {
        if i == cs.len() {
            let m = pairs.len();
            let ch = chunks(pairs);
            if m > best.0 || (m == best.0 && ch < best.1) {
                *best = (m, ch);
            }
            return;
        }
        rec(i + 1, cs, rs, used, pairs, best);
        for j in 0..rs.len() {
            if !used[j] && cs[i] == rs[j] {
                used[j] = true;
                pairs.push((i, j));
                rec(i + 1, cs, rs, used, pairs, best);
                pairs.pop();
                used[j] = false;
            }
        }
    }
    rec(0, &cs, &rs, &mut used, &mut pairs, &mut best);
    best
}

pub fn naive_meteor(cand: &[String], reference: &[String]) -> f64 {
    let (m, ch) = brute_force_alignment(cand, reference);
    if m == 0 {
        return 0.0;
    }
    let (m, ch) = (m as f64, ch as f64);
    let p = m / cand.len() as f64;
    let r = m / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    fmean * (1.0 - 0.5 * (ch / m).powi(3))
}

pub const VOCAB: &[&str] = &[
    "sinus", "rhythm", "rhythms", "normal", "abnormal", "ecg", ".", ",", "block", "blocks",
    "left", "axis",
];

/// Random token sequence of length `0..=max_len` over [`VOCAB`].
pub fn random_tokens(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string())
        .collect()
}

pub fn seq(tokens: &[String]) -> TokenSeq {
    TokenSeq::from_tokens(tokens)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random unit vectors, row-major.
pub fn unit_vectors(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<f32> {
    use rand_distr::{Distribution, StandardNormal};
    let mut out = Vec::with_capacity(n * d);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(row.iter().map(|x| (x / norm) as f32));
    }
    out
}

/// Exact k nearest rows by squared L2 computed in f64, ties by id.
pub fn brute_force_knn(
    data: &[f32],
    ids: &[String],
    d: usize,
    query: &[f32],
    k: usize,
) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let row = &data[i * d..(i + 1) * d];
            let dist = row
                .iter()
                .zip(query)
                .map(|(a, b)| {
                    let x = *a as f64 - *b as f64;
                    x * x
                })
                .sum::<f64>();
            (id.clone(), dist)
        })
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}
