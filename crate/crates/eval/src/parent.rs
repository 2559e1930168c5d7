//! Simplified PARENT with word-overlap entailment.
//!
//! Precision credits a prediction n-gram (n = 1..4) when it occurs in the
//! reference or when all of its tokens occur in the triple fields.
//! Recall is the geometric blend, with weight 0.5, of reference n-gram
//! recall and slot recall, the share of each triple slot's tokens that
//! the prediction mentions. Slots are the subject, the predicate without
//! its operator and the object of every non-TITLE triple; TREND directions
//! are not slots.

use crate::tokenize::{ngrams, tokenize};
use crate::{EvalError, EvalRecord};
use nbiig_core::analytics::AnalysisType;
use nbiig_core::rdf::{RdfTriple, TripleSet};
use std::collections::HashSet;

pub const PARENT_ORDER: usize = 4;
pub const LAMBDA: f64 = 0.5;

fn content(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .collect()
}

fn slots(ts: &TripleSet) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for t in ts.content() {
        out.push(content(tokenize(t.subject())));
        let predicate = match t.column() {
            Some(col) => col.to_string(),
            None if t.kind() == Some(AnalysisType::Correlated) => String::new(),
            None => t.predicate().to_string(),
        };
        out.push(content(tokenize(&predicate)));
        if t.kind() != Some(AnalysisType::Trend) {
            out.push(content(tokenize(t.object())));
        }
    }
    out.retain(|s| !s.is_empty());
    out
}

fn table_vocab(ts: &TripleSet) -> HashSet<String> {
    ts.content()
        .iter()
        .flat_map(RdfTriple::fields)
        .flat_map(tokenize)
        .collect()
}

/// An order with no match counts as 0.1 of a match.
const SMOOTHING_EPS: f64 = 0.1;

fn geometric(ratios: &[(usize, usize)]) -> f64 {
    if ratios.is_empty() {
        return 1.0;
    }
    let logs: f64 = ratios
        .iter()
        .map(|&(m, t)| (if m == 0 { SMOOTHING_EPS } else { m as f64 }) / t as f64)
        .map(f64::ln)
        .sum();
    (logs / ratios.len() as f64).exp()
}

fn entailed_precision(pred: &[String], reference: &[String], vocab: &HashSet<String>) -> f64 {
    let mut per_order = Vec::new();
    for n in 1..=PARENT_ORDER {
        let p = ngrams(pred, n);
        if p.is_empty() {
            continue;
        }
        let r = ngrams(reference, n);
        let (mut credit, mut total) = (0usize, 0usize);
        for (g, c) in &p {
            let in_ref = r.get(g).copied().unwrap_or(0).min(*c);
            let in_table = if g.iter().all(|t| vocab.contains(t)) { *c } else { 0 };
            credit += in_ref.max(in_table);
            total += c;
        }
        per_order.push((credit, total));
    }
    geometric(&per_order)
}

fn reference_recall(pred: &[String], reference: &[String]) -> f64 {
    let mut per_order = Vec::new();
    for n in 1..=PARENT_ORDER {
        let r = ngrams(reference, n);
        if r.is_empty() {
            continue;
        }
        let p = ngrams(pred, n);
        let matched: usize = r.iter().map(|(g, c)| (*c).min(p.get(g).copied().unwrap_or(0))).sum();
        per_order.push((matched, r.values().sum::<usize>()));
    }
    geometric(&per_order)
}

fn slot_recall(pred: &[String], slots: &[Vec<String>]) -> f64 {
    if slots.is_empty() {
        return 1.0;
    }
    let have: HashSet<&String> = pred.iter().collect();
    let total: f64 = slots
        .iter()
        .map(|s| s.iter().filter(|t| have.contains(t)).count() as f64 / s.len() as f64)
        .sum();
    total / slots.len() as f64
}

/// PARENT F-score of one prediction against one reference.
pub fn parent_single(prediction: &str, reference: &str, ts: &TripleSet) -> f64 {
    let pred = tokenize(prediction);
    let refr = tokenize(reference);
    let precision = entailed_precision(&pred, &refr, &table_vocab(ts));
    let rr = reference_recall(&pred, &refr);
    let sr = slot_recall(&pred, &slots(ts));
    let recall = if rr <= 0.0 || sr <= 0.0 {
        0.0
    } else {
        rr.powf(1.0 - LAMBDA) * sr.powf(LAMBDA)
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Mean over records of the best score against any reference.
pub fn parent(records: &[EvalRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut sum = 0.0;
    for (i, r) in records.iter().enumerate() {
        let ts = r.triples.as_ref().ok_or(EvalError::MissingTriples(i))?;
        if r.references.is_empty() {
            return Err(EvalError::NoReferences(i));
        }
        sum += r
            .references
            .iter()
            .map(|rf| parent_single(&r.prediction, rf, ts))
            .fold(0.0, f64::max);
    }
    Ok((sum / records.len() as f64).clamp(0.0, 1.0))
}
