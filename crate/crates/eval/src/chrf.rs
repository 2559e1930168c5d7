//! chrF++: character n-grams up to 6 (whitespace removed) plus word
//! n-grams up to 2, corpus statistics summed per order, precision and
//! recall averaged over orders, combined as an F-beta score.

use crate::tokenize::{ngrams, tokenize};
use crate::{EvalError, EvalRecord};
use std::collections::HashMap;

pub const CHAR_ORDER: usize = 6;
pub const WORD_ORDER: usize = 2;
pub const DEFAULT_BETA: f64 = 2.0;

/// Per order: (matches, hypothesis n-grams, reference n-grams).
type Stats = Vec<(usize, usize, usize)>;

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn overlap<K: std::hash::Hash + Eq>(h: &HashMap<K, usize>, r: &HashMap<K, usize>) -> (usize, usize, usize) {
    let m = h.iter().map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0))).sum();
    (m, h.values().sum(), r.values().sum())
}

fn sentence_stats(hyp: &str, reference: &str) -> Stats {
    let (ht, rt) = (tokenize(hyp), tokenize(reference));
    let hc: Vec<char> = ht.concat().chars().collect();
    let rc: Vec<char> = rt.concat().chars().collect();
    let mut stats = Vec::with_capacity(CHAR_ORDER + WORD_ORDER);
    for n in 1..=CHAR_ORDER {
        stats.push(overlap(&char_ngrams(&hc, n), &char_ngrams(&rc, n)));
    }
    for n in 1..=WORD_ORDER {
        stats.push(overlap(&ngrams(&ht, n), &ngrams(&rt, n)));
    }
    stats
}

fn f_score(stats: &Stats, beta: f64) -> f64 {
    let (mut p, mut r, mut orders) = (0.0, 0.0, 0);
    for &(m, h, rf) in stats {
        if h == 0 && rf == 0 {
            continue;
        }
        p += if h > 0 { m as f64 / h as f64 } else { 0.0 };
        r += if rf > 0 { m as f64 / rf as f64 } else { 0.0 };
        orders += 1;
    }
    if orders == 0 {
        return 100.0;
    }
    let (p, r) = (p / orders as f64, r / orders as f64);
    if p == 0.0 && r == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    100.0 * (1.0 + b2) * p * r / (b2 * p + r)
}

pub fn chrf_pp(records: &[EvalRecord]) -> Result<f64, EvalError> {
    chrf_pp_beta(records, DEFAULT_BETA)
}

/// chrF++ with a custom beta. Each record contributes the statistics of its
/// best-scoring reference.
pub fn chrf_pp_beta(records: &[EvalRecord], beta: f64) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut total: Stats = vec![(0, 0, 0); CHAR_ORDER + WORD_ORDER];
    for (i, r) in records.iter().enumerate() {
        let best = r
            .references
            .iter()
            .map(|rf| sentence_stats(&r.prediction, rf))
            .map(|s| (f_score(&s, beta), s))
            .fold(None::<(f64, Stats)>, |acc, (f, s)| match acc {
                Some((bf, _)) if bf >= f => acc,
                _ => Some((f, s)),
            })
            .ok_or(EvalError::NoReferences(i))?;
        for (t, s) in total.iter_mut().zip(best.1) {
            t.0 += s.0;
            t.1 += s.1;
            t.2 += s.2;
        }
    }
    Ok(f_score(&total, beta).clamp(0.0, 100.0))
}
