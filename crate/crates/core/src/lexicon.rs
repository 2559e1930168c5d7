//! Word-level helpers shared by the faithfulness scorer and the corpus
//! matcher: tokenization, naive singularization, stopwords, and the
//! per-type indicator dictionary.

use crate::analytics::AnalysisType;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

const STOPWORDS: &[&str] = &[
    "a", "about", "across", "after", "all", "also", "an", "and", "are", "as", "at", "be", "been",
    "between", "by", "during", "for", "from", "had", "has", "have", "in", "into", "is", "it",
    "its", "of", "on", "or", "over", "per", "than", "that", "the", "their", "there", "these",
    "this", "to", "was", "were", "which", "while", "with",
];

pub fn is_stopword(tok: &str) -> bool {
    STOPWORDS.binary_search(&tok).is_ok()
}

/// Lowercased alphanumeric runs (`_` counts as a word character).
pub fn word_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Naive singular form: `-ies` → `-y`, `-sses` → `-ss`, trailing `-s`
/// dropped unless the word ends in `ss`, `us` or `is`.
pub fn singularize(tok: &str) -> String {
    if tok.len() <= 3 || tok.chars().any(|c| c.is_ascii_digit()) {
        return tok.to_string();
    }
    if let Some(stem) = tok.strip_suffix("ies") {
        return format!("{stem}y");
    }
    if let Some(stem) = tok.strip_suffix("sses") {
        return format!("{stem}ss");
    }
    if tok.ends_with('s') && !(tok.ends_with("ss") || tok.ends_with("us") || tok.ends_with("is")) {
        return tok[..tok.len() - 1].to_string();
    }
    tok.to_string()
}

/// Non-stopword tokens in singular form.
pub fn content_tokens(text: &str) -> Vec<String> {
    word_tokens(text)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .map(|t| singularize(&t))
        .collect()
}

/// Surface variants of a name under naive plural/singular inflection.
pub fn inflections(name: &str) -> Vec<String> {
    let base = name.trim().to_lowercase();
    let mut out = vec![base.clone(), format!("{base}s"), format!("{base}es")];
    if let Some(stem) = base.strip_suffix("es") {
        out.push(stem.to_string());
    }
    if let Some(stem) = base.strip_suffix('s') {
        out.push(stem.to_string());
    }
    if let Some(stem) = base.strip_suffix('y') {
        out.push(format!("{stem}ies"));
    }
    if let Some(stem) = base.strip_suffix("ies") {
        out.push(format!("{stem}y"));
    }
    out.retain(|v| !v.is_empty());
    out.dedup();
    out
}

/// True when `needle` occurs in `haystack` (both lowercase) bounded by
/// non-word characters.
pub fn contains_phrase(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let is_word = |c: char| c.is_alphanumeric() || c == '_';
    let mut start = 0;
    while let Some(pos) = haystack[start..].find(needle) {
        let at = start + pos;
        let end = at + needle.len();
        let before_ok = haystack[..at].chars().next_back().is_none_or(|c| !is_word(c));
        let after_ok = haystack[end..].chars().next().is_none_or(|c| !is_word(c));
        if before_ok && after_ok {
            return true;
        }
        start = at + haystack[at..].chars().next().map(char::len_utf8).unwrap_or(1);
    }
    false
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DictionaryError {
    #[error("type {0} has fewer than 3 indicator words")]
    TooFewWords(AnalysisType),
    #[error("indicator {0:?} is not lowercase")]
    NotLowercase(String),
    #[error("dictionary has no entry for {0}")]
    MissingType(AnalysisType),
}

/// Indicator words per analysis type. Multi-word entries match as phrases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<AnalysisType, Vec<String>>", into = "BTreeMap<AnalysisType, Vec<String>>")]
pub struct TypeDictionary {
    words: BTreeMap<AnalysisType, Vec<String>>,
}

impl TryFrom<BTreeMap<AnalysisType, Vec<String>>> for TypeDictionary {
    type Error = DictionaryError;

    fn try_from(words: BTreeMap<AnalysisType, Vec<String>>) -> Result<Self, Self::Error> {
        TypeDictionary::new(words)
    }
}

impl From<TypeDictionary> for BTreeMap<AnalysisType, Vec<String>> {
    fn from(d: TypeDictionary) -> Self {
        d.words
    }
}

impl Default for TypeDictionary {
    fn default() -> Self {
        use AnalysisType::*;
        let table: [(AnalysisType, &[&str]); 10] = [
            (Max, &["highest", "largest", "peaked", "leading", "maximum", "biggest", "greatest", "record high", "most"]),
            (Min, &["lowest", "smallest", "minimum", "least", "fewest", "bottom", "record low"]),
            (Sum, &["total", "sum", "combined", "overall", "cumulative", "altogether", "in total"]),
            (Average, &["average", "mean", "averaged", "avg", "on average"]),
            (Value, &["was", "were", "amounted", "stood", "reached", "valued", "came to"]),
            (MostRecent, &["latest", "recent", "recently", "currently", "as of", "most recent", "now"]),
            (Compare, &["compared", "higher", "lower", "versus", "than", "matched", "up from", "down from"]),
            (Trend, &["peak", "grew", "decline", "decrease", "drop", "trend", "upward", "downward", "increased", "rose", "fell", "growth", "declined", "dropped"]),
            (Correlated, &["correlated", "correlation", "correlate", "correlates", "in tandem"]),
            (Ranked, &["ranked", "ranking", "rank", "top", "followed by", "second", "third"]),
        ];
        TypeDictionary {
            words: table
                .into_iter()
                .map(|(k, ws)| (k, ws.iter().map(|w| w.to_string()).collect()))
                .collect(),
        }
    }
}

impl TypeDictionary {
    pub fn new(words: BTreeMap<AnalysisType, Vec<String>>) -> Result<Self, DictionaryError> {
        for kind in AnalysisType::ALL {
            let list = words.get(&kind).ok_or(DictionaryError::MissingType(kind))?;
            if list.len() < 3 {
                return Err(DictionaryError::TooFewWords(kind));
            }
            if let Some(w) = list.iter().find(|w| w.to_lowercase() != **w) {
                return Err(DictionaryError::NotLowercase(w.clone()));
            }
        }
        Ok(TypeDictionary { words })
    }

    pub fn words(&self, kind: AnalysisType) -> &[String] {
        self.words.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Whether `text` carries at least one indicator word for `kind`.
    pub fn indicates(&self, text: &str, kind: AnalysisType) -> bool {
        let normalized = word_tokens(text).join(" ");
        self.words(kind).iter().any(|w| contains_phrase(&normalized, w))
    }
}
