//! Translation edit rate with greedy block shifts.
//!
//! Each round tries every shift of a hypothesis span (up to
//! [`MAX_SHIFT_LEN`] words) that also occurs in the reference, to every
//! position, and applies the one that lowers the word edit distance the
//! most, as long as the gain exceeds the cost of the shift itself.

use crate::tokenize::tokenize;
use crate::{EvalError, EvalRecord};

pub const MAX_SHIFT_LEN: usize = 10;

fn edit_distance(a: &[String], b: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn contains_span(haystack: &[String], span: &[String]) -> bool {
    haystack.windows(span.len()).any(|w| w == span)
}

fn shifted(hyp: &[String], start: usize, len: usize, to: usize) -> Vec<String> {
    let mut rest: Vec<String> = hyp[..start].iter().chain(&hyp[start + len..]).cloned().collect();
    let span = hyp[start..start + len].to_vec();
    rest.splice(to..to, span);
    rest
}

/// Edits (shifts included) to turn `hyp` into `reference`.
pub fn ter_edits(hyp: &[String], reference: &[String]) -> usize {
    let mut hyp = hyp.to_vec();
    let mut shifts = 0;
    let mut dist = edit_distance(&hyp, reference);
    loop {
        let mut best: Option<(usize, Vec<String>)> = None;
        for len in 1..=MAX_SHIFT_LEN.min(hyp.len()) {
            for start in 0..=hyp.len() - len {
                if !contains_span(reference, &hyp[start..start + len]) {
                    continue;
                }
                for to in 0..=hyp.len() - len {
                    if to == start {
                        continue;
                    }
                    let candidate = shifted(&hyp, start, len, to);
                    let d = edit_distance(&candidate, reference);
                    if d + 1 < dist && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, candidate));
                    }
                }
            }
        }
        match best {
            Some((d, candidate)) => {
                hyp = candidate;
                dist = d;
                shifts += 1;
            }
            None => return dist + shifts,
        }
    }
}

/// Corpus TER: total edits against each record's closest reference over
/// the total average reference length.
pub fn ter(records: &[EvalRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut edits = 0usize;
    let mut ref_len = 0.0;
    for (i, r) in records.iter().enumerate() {
        if r.references.is_empty() {
            return Err(EvalError::NoReferences(i));
        }
        let hyp = tokenize(&r.prediction);
        let refs: Vec<Vec<String>> = r.references.iter().map(|s| tokenize(s)).collect();
        edits += refs.iter().map(|rf| ter_edits(&hyp, rf)).min().unwrap_or(0);
        ref_len += refs.iter().map(Vec::len).sum::<usize>() as f64 / refs.len() as f64;
    }
    Ok(if ref_len > 0.0 {
        edits as f64 / ref_len
    } else if edits == 0 {
        0.0
    } else {
        1.0
    })
}
