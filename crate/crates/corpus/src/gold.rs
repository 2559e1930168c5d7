//! Scoring the matcher against a labeled corpus.

use crate::matching::{build_pairs, WebpageInstance};
use crate::sentences::split_sentences;
use nbiig_core::lexicon::TypeDictionary;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Path of the bundled gold corpus, relative to this crate's root.
pub const GOLD_CORPUS: &str = "data/gold_matching.jsonl";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldLabel {
    pub sentence: String,
    pub triples: Vec<[String; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldRecord {
    pub instance: WebpageInstance,
    pub labels: Vec<GoldLabel>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchingScore {
    pub sentences: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Sentences where the splitter disagreed with the labels.
    pub split_errors: usize,
    pub mismatches: Vec<String>,
}

impl MatchingScore {
    pub fn precision(&self) -> f64 {
        let predicted = self.true_positives + self.false_positives;
        if predicted == 0 {
            1.0
        } else {
            self.true_positives as f64 / predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let gold = self.true_positives + self.false_negatives;
        if gold == 0 {
            1.0
        } else {
            self.true_positives as f64 / gold as f64
        }
    }
}

/// Micro-averaged precision and recall over (sentence, triple) decisions.
pub fn score_matching(records: &[GoldRecord], dict: &TypeDictionary) -> MatchingScore {
    let mut score = MatchingScore::default();
    for rec in records {
        let split = split_sentences(&rec.instance.summary);
        let expected: Vec<&str> = rec.labels.iter().map(|l| l.sentence.as_str()).collect();
        if split != expected {
            score.split_errors += 1;
            score.mismatches.push(format!("split: {split:?} vs {expected:?}"));
        }
        let pairs = build_pairs(&rec.instance, dict);
        for label in &rec.labels {
            score.sentences += 1;
            let gold: BTreeSet<[String; 3]> = label.triples.iter().cloned().collect();
            let predicted: BTreeSet<[String; 3]> = pairs
                .iter()
                .filter(|p| p.sentence == label.sentence)
                .flat_map(|p| p.triples.content().iter())
                .map(|t| t.fields().map(str::to_string))
                .collect();
            let tp = gold.intersection(&predicted).count();
            score.true_positives += tp;
            score.false_positives += predicted.len() - tp;
            score.false_negatives += gold.len() - tp;
            if gold != predicted {
                score.mismatches.push(format!(
                    "{:?}: expected {gold:?}, matched {predicted:?}",
                    label.sentence
                ));
            }
        }
    }
    score
}
