//! Corpus BLEU-4 and sentence-averaged ROUGE F-measures over
//! whitespace-tokenized text. Scores are on a 0-100 scale.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MetricError;

fn tokens(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn ngram_counts<'a>(toks: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut m = HashMap::new();
    if toks.len() >= n {
        for w in toks.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Clipped n-gram matches, candidate total and reference total.
fn overlap(cand: &[&str], reference: &[&str], n: usize) -> (usize, usize, usize) {
    let c = ngram_counts(cand, n);
    let r = ngram_counts(reference, n);
    let matched = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
    (matched, c.values().sum(), r.values().sum())
}

fn check_lengths<C: AsRef<str>, R: AsRef<str>>(cands: &[C], refs: &[R]) -> Result<(), MetricError> {
    if cands.len() != refs.len() {
        return Err(MetricError::LengthMismatch { candidates: cands.len(), references: refs.len() });
    }
    if cands.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

/// Corpus BLEU with uniform weights over 1- to 4-grams, clipped counts and
/// the brevity penalty, one reference per candidate, no smoothing.
pub fn bleu4<C: AsRef<str>, R: AsRef<str>>(cands: &[C], refs: &[R]) -> Result<f64, MetricError> {
    check_lengths(cands, refs)?;
    let mut matched = [0usize; 4];
    let mut total = [0usize; 4];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for (c, r) in cands.iter().zip(refs) {
        let (c, r) = (tokens(c.as_ref()), tokens(r.as_ref()));
        cand_len += c.len();
        ref_len += r.len();
        for n in 1..=4 {
            let (m, t, _) = overlap(&c, &r, n);
            matched[n - 1] += m;
            total[n - 1] += t;
        }
    }
    if cand_len == 0 || matched.contains(&0) {
        return Ok(0.0);
    }
    let log_precision: f64 = (0..4).map(|i| (matched[i] as f64 / total[i] as f64).ln()).sum::<f64>() / 4.0;
    let bp = if cand_len > ref_len { 1.0 } else { (1.0 - ref_len as f64 / cand_len as f64).exp() };
    Ok(100.0 * bp * log_precision.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RougeVariant {
    R1,
    R2,
    R4,
    L,
}

impl RougeVariant {
    pub const ALL: [RougeVariant; 4] = [RougeVariant::R1, RougeVariant::R2, RougeVariant::R4, RougeVariant::L];
}

impl fmt::Display for RougeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RougeVariant::R1 => "rouge1",
            RougeVariant::R2 => "rouge2",
            RougeVariant::R4 => "rouge4",
            RougeVariant::L => "rougeL",
        })
    }
}

impl FromStr for RougeVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().trim_start_matches("rouge").trim_start_matches(['-', '_']) {
            "1" => Ok(RougeVariant::R1),
            "2" => Ok(RougeVariant::R2),
            "4" => Ok(RougeVariant::R4),
            "l" => Ok(RougeVariant::L),
            _ => Err(format!("unknown ROUGE variant `{s}` (expected 1, 2, 4 or L)")),
        }
    }
}

fn f1(matched: usize, cand_total: usize, ref_total: usize) -> f64 {
    if matched == 0 {
        return 0.0;
    }
    let p = matched as f64 / cand_total as f64;
    let r = matched as f64 / ref_total as f64;
    2.0 * p * r / (p + r)
}

fn lcs_len(a: &[&str], b: &[&str]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// F-measure for one sentence pair on a 0-1 scale. When neither side has a
/// unit to count the score is 1 for identical token sequences, else 0.
pub fn rouge_sentence(cand: &str, reference: &str, variant: RougeVariant) -> f64 {
    let (c, r) = (tokens(cand), tokens(reference));
    let (matched, ct, rt) = match variant {
        RougeVariant::R1 => overlap(&c, &r, 1),
        RougeVariant::R2 => overlap(&c, &r, 2),
        RougeVariant::R4 => overlap(&c, &r, 4),
        RougeVariant::L => (lcs_len(&c, &r), c.len(), r.len()),
    };
    if ct == 0 && rt == 0 {
        return if c == r { 1.0 } else { 0.0 };
    }
    f1(matched, ct, rt)
}

/// Mean of per-sentence F-measures.
pub fn rouge<C: AsRef<str>, R: AsRef<str>>(cands: &[C], refs: &[R], variant: RougeVariant) -> Result<f64, MetricError> {
    check_lengths(cands, refs)?;
    let sum: f64 = cands.iter().zip(refs).map(|(c, r)| rouge_sentence(c.as_ref(), r.as_ref(), variant)).sum();
    Ok(100.0 * sum / cands.len() as f64)
}
