//! Deterministic faithfulness check of a sentence against its triple set.
//!
//! Every field of every non-TITLE triple is a slot. Numeric slots need a
//! number in the text that equals the slot value once the slot is rounded
//! (half-even) to the mention's precision. Textual slots need their content
//! tokens present. Predicate slots need the column tokens plus an indicator
//! word for the operator. Numbers in the text that no triple field accounts
//! for are penalized:
//!
//! `score = supported / total * (1 - penalty * unsupported)`, clamped to [0, 1].

use crate::analytics::AnalysisType;
use crate::lexicon::{content_tokens, contains_phrase, word_tokens, TypeDictionary};
use crate::numfmt::{decimals_of, round_to};
use crate::rdf::{predicate_operator, RdfTriple, TripleSet};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FaithfulnessError {
    #[error("triple set has no slots to verify")]
    EmptyTripleSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberMention {
    pub surface: String,
    pub value: f64,
    pub precision: usize,
}

impl NumberMention {
    /// Whether `candidate`, rounded to this mention's precision, reads as
    /// this mention.
    pub fn matches(&self, candidate: f64) -> bool {
        round_to(candidate, self.precision) == round_to(self.value, self.precision)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClaimExtraction {
    pub numbers: Vec<NumberMention>,
    pub entities: Vec<String>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Numbers standing as their own tokens: `81.2`, `-3`, `2022`. Digits glued
/// to letters (`Q1`, `3rd`) are not numbers. A `-` or `+` is a sign only at
/// the start of a token.
pub fn extract_numbers(text: &str) -> Vec<NumberMention> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        let prev = if i == 0 { None } else { Some(chars[i - 1].1) };
        let signed = (c == '-' || c == '+')
            && chars.get(i + 1).is_some_and(|(_, d)| d.is_ascii_digit())
            && prev.is_none_or(|p| p.is_whitespace() || "([:".contains(p));
        let begins = c.is_ascii_digit() && prev.is_none_or(|p| !is_word_char(p) && p != '.');
        if !(signed || begins) {
            i += 1;
            continue;
        }
        let mut j = if signed { i + 1 } else { i };
        while j < chars.len() && chars[j].1.is_ascii_digit() {
            j += 1;
        }
        if j + 1 < chars.len() && chars[j].1 == '.' && chars[j + 1].1.is_ascii_digit() {
            j += 1;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
        }
        if chars.get(j).is_some_and(|(_, d)| is_word_char(*d)) {
            // glued to a word: skip the whole run
            while j < chars.len() && is_word_char(chars[j].1) {
                j += 1;
            }
            i = j;
            continue;
        }
        let end = chars.get(j).map(|(b, _)| *b).unwrap_or(text.len());
        let surface = &text[start..end];
        if let Ok(value) = surface.parse::<f64>() {
            out.push(NumberMention {
                surface: surface.to_string(),
                value,
                precision: decimals_of(surface),
            });
        }
        i = j;
    }
    out
}

pub fn extract_claims(text: &str) -> ClaimExtraction {
    ClaimExtraction {
        numbers: extract_numbers(text),
        entities: content_tokens(text)
            .into_iter()
            .filter(|t| !t.chars().all(|c| c.is_ascii_digit()))
            .collect(),
    }
}

/// A field that is exactly one number, e.g. `"81.2"` or `"2022"`.
pub fn numeric_field(field: &str) -> Option<f64> {
    match extract_numbers(field).as_slice() {
        [m] if m.surface == field.trim() => Some(m.value),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessReport {
    pub score: f64,
    pub supported_slots: usize,
    pub total_slots: usize,
    pub unsupported_numbers: Vec<String>,
}

const UP_WORDS: &[&str] = &["upward", "up", "increase", "increased", "increasing", "grew", "rose", "rising", "growth", "grown"];
const DOWN_WORDS: &[&str] = &["downward", "down", "decrease", "decreased", "decreasing", "decline", "declined", "fell", "falling", "drop", "dropped"];
const FLAT_WORDS: &[&str] = &["no clear trend", "flat", "stable", "unchanged", "steady"];

#[derive(Debug, Clone)]
pub struct FaithfulnessScorer {
    pub dictionary: TypeDictionary,
    /// Multiplicative penalty per unsupported number.
    pub penalty: f64,
}

impl Default for FaithfulnessScorer {
    fn default() -> Self {
        FaithfulnessScorer {
            dictionary: TypeDictionary::default(),
            penalty: 0.25,
        }
    }
}

struct TextView {
    lower: String,
    tokens: HashSet<String>,
    numbers: Vec<NumberMention>,
}

impl TextView {
    fn new(text: &str) -> Self {
        TextView {
            lower: word_tokens(text).join(" "),
            tokens: content_tokens(text).into_iter().collect(),
            numbers: extract_numbers(text),
        }
    }

    fn has_number(&self, value: f64) -> bool {
        self.numbers.iter().any(|m| m.matches(value))
    }

    fn has_words_of(&self, field: &str) -> bool {
        let toks = content_tokens(field);
        if toks.is_empty() {
            let raw = word_tokens(field).join(" ");
            return !raw.is_empty() && contains_phrase(&self.lower, &raw);
        }
        toks.iter().all(|t| self.tokens.contains(t))
    }

    fn has_any(&self, words: &[&str]) -> bool {
        words.iter().any(|w| contains_phrase(&self.lower, w))
    }
}

impl FaithfulnessScorer {
    fn slot_supported(&self, view: &TextView, triple: &RdfTriple, field: usize) -> bool {
        let kind = triple.kind().unwrap_or(AnalysisType::Value);
        let text = triple.fields()[field];
        if field == 1 {
            let column_ok = triple.column().is_none_or(|c| view.has_words_of(c));
            let operator_ok = predicate_operator(text).is_none()
                || self.dictionary.indicates(&view.lower, kind);
            return column_ok && operator_ok;
        }
        if field == 2 && kind == AnalysisType::Trend {
            match text {
                "UP" => return view.has_any(UP_WORDS),
                "DOWN" => return view.has_any(DOWN_WORDS),
                "NONE" => return view.has_any(FLAT_WORDS),
                _ => {}
            }
        }
        match numeric_field(text) {
            Some(v) => view.has_number(v),
            None => view.has_words_of(text),
        }
    }

    pub fn score(&self, text: &str, ts: &TripleSet) -> Result<FaithfulnessReport, FaithfulnessError> {
        let content = ts.content();
        if content.is_empty() {
            return Err(FaithfulnessError::EmptyTripleSet);
        }
        let view = TextView::new(text);
        let total_slots = content.len() * 3;
        let supported_slots = content
            .iter()
            .map(|t| (0..3).filter(|&f| self.slot_supported(&view, t, f)).count())
            .sum::<usize>();

        let known: Vec<f64> = ts
            .triples()
            .iter()
            .flat_map(|t| t.fields())
            .flat_map(extract_numbers)
            .map(|m| m.value)
            .collect();
        let unsupported_numbers: Vec<String> = view
            .numbers
            .iter()
            .filter(|m| !known.iter().any(|&k| m.matches(k)))
            .map(|m| m.surface.clone())
            .collect();

        let coverage = supported_slots as f64 / total_slots as f64;
        let score =
            (coverage * (1.0 - self.penalty * unsupported_numbers.len() as f64)).clamp(0.0, 1.0);
        Ok(FaithfulnessReport {
            score,
            supported_slots,
            total_slots,
            unsupported_numbers,
        })
    }
}

fn default_scorer() -> &'static FaithfulnessScorer {
    static SCORER: OnceLock<FaithfulnessScorer> = OnceLock::new();
    SCORER.get_or_init(FaithfulnessScorer::default)
}

/// Scores with the default dictionary and a 0.25 penalty.
pub fn score(text: &str, ts: &TripleSet) -> Result<FaithfulnessReport, FaithfulnessError> {
    default_scorer().score(text, ts)
}
