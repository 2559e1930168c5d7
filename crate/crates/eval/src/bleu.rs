//! Corpus BLEU-4: clipped modified n-gram precision, brevity penalty and
//! uniform weights. Orders with no candidate n-grams anywhere in the corpus
//! are left out of the geometric mean; an order with n-grams but no match
//! has its match count floored at 0.1. A corpus without a single unigram
//! match scores 0.

use crate::tokenize::{ngrams, tokenize};
use crate::{EvalError, EvalRecord};

pub const MAX_ORDER: usize = 4;
pub const SMOOTHING_EPS: f64 = 0.1;

/// `(clipped matches, candidate n-grams)` for one sentence.
pub fn modified_precision(candidate: &[String], references: &[Vec<String>], n: usize) -> (usize, usize) {
    let cand = ngrams(candidate, n);
    let refs: Vec<_> = references.iter().map(|r| ngrams(r, n)).collect();
    let mut clipped = 0;
    let mut total = 0;
    for (g, c) in &cand {
        let max_ref = refs.iter().map(|r| r.get(g).copied().unwrap_or(0)).max().unwrap_or(0);
        clipped += (*c).min(max_ref);
        total += c;
    }
    (clipped, total)
}

/// Length of the reference closest to `len`, shorter on ties.
fn closest_ref_len(len: usize, references: &[Vec<String>]) -> usize {
    references
        .iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(len), r))
        .unwrap_or(0)
}

pub fn bleu(records: &[EvalRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for (i, r) in records.iter().enumerate() {
        if r.references.is_empty() {
            return Err(EvalError::NoReferences(i));
        }
        let cand = tokenize(&r.prediction);
        let refs: Vec<Vec<String>> = r.references.iter().map(|s| tokenize(s)).collect();
        for n in 1..=MAX_ORDER {
            let (m, t) = modified_precision(&cand, &refs, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
        cand_len += cand.len();
        ref_len += closest_ref_len(cand.len(), &refs);
    }
    if matches[0] == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 0..MAX_ORDER {
        if totals[n] == 0 {
            continue;
        }
        let m = if matches[n] == 0 { SMOOTHING_EPS } else { matches[n] as f64 };
        log_sum += (m / totals[n] as f64).ln();
        orders += 1;
    }
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok((100.0 * bp * (log_sum / orders as f64).exp()).clamp(0.0, 100.0))
}
