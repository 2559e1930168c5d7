//! Sentence to triple matching over crawled webpage instances.
//!
//! A sentence matches a triple when it mentions a value the triple is about
//! (exactly or rounded to the mention's precision) together with the
//! triple's column or row name, and carries an indicator word for the
//! triple's analysis type.

use crate::sentences::split_sentences;
use crate::CorpusError;
use nbiig_core::analytics::{run_all, AnalysisType};
use nbiig_core::faithfulness::{extract_numbers, numeric_field, NumberMention};
use nbiig_core::lexicon::{contains_phrase, inflections, word_tokens, TypeDictionary};
use nbiig_core::rdf::{cast, RdfTriple, TripleSet};
use nbiig_core::recommender::SegmentKey;
use nbiig_core::table::{detect_shape, x_range_label, ChartKind, DataTable, SubjectList, TableContext};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct WebpageInstance {
    pub table: DataTable,
    pub title: String,
    pub subject: String,
    pub summary: String,
}

#[derive(Deserialize)]
struct RawInstance {
    table: DataTable,
    title: String,
    subject: String,
    summary: String,
}

impl TryFrom<RawInstance> for WebpageInstance {
    type Error = CorpusError;

    fn try_from(r: RawInstance) -> Result<Self, Self::Error> {
        WebpageInstance::new(r.table, r.title, r.subject, r.summary)
    }
}

impl WebpageInstance {
    pub fn new(table: DataTable, title: String, subject: String, summary: String) -> Result<Self, CorpusError> {
        if summary.trim().is_empty() {
            return Err(CorpusError::InvalidInstance("summary is empty".into()));
        }
        RdfTriple::title(&title).map_err(|e| CorpusError::InvalidInstance(format!("title: {e}")))?;
        Ok(WebpageInstance {
            table,
            title,
            subject,
            summary,
        })
    }

    pub fn context(&self, subjects: &SubjectList) -> TableContext {
        TableContext::new(&self.title, &self.subject, ChartKind::None, subjects)
            .expect("title validated on construction")
    }

    pub fn segment(&self, subjects: &SubjectList) -> SegmentKey {
        SegmentKey::new(detect_shape(&self.table), &subjects.normalize(&self.subject))
    }

    /// Every non-TITLE triple the analyses produce, deduplicated in first
    /// appearance order, plus the full sets they came from.
    pub fn triple_pool(&self, subjects: &SubjectList) -> (Vec<RdfTriple>, Vec<TripleSet>) {
        let ctx = self.context(subjects);
        let range = x_range_label(&self.table);
        let sets: Vec<TripleSet> = run_all(&self.table, detect_shape(&self.table))
            .iter()
            .filter_map(|r| cast(r, &ctx, &range).ok())
            .collect();
        let mut seen = BTreeSet::new();
        let mut pool = Vec::new();
        for t in sets.iter().flat_map(|s| s.content()) {
            if seen.insert(t.clone()) {
                pool.push(t.clone());
            }
        }
        (pool, sets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub sentence: String,
    pub triples: TripleSet,
    pub insight_types: BTreeSet<AnalysisType>,
    /// Segment of the source table, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<SegmentKey>,
}

struct SentenceView {
    words: String,
    numbers: Vec<NumberMention>,
}

impl SentenceView {
    fn new(sentence: &str) -> Self {
        SentenceView {
            words: word_tokens(sentence).join(" "),
            numbers: extract_numbers(sentence),
        }
    }

    fn mentions(&self, value: f64) -> bool {
        self.numbers.iter().any(|m| m.matches(value))
    }

    fn names(&self, name: &str) -> bool {
        inflections(name)
            .iter()
            .any(|v| contains_phrase(&self.words, &word_tokens(v).join(" ")))
    }
}

/// Values a sentence may cite for the triple: the object for value-bearing
/// triples, otherwise the cells of the columns involved.
fn candidate_values(triple: &RdfTriple, table: &DataTable) -> Vec<f64> {
    let kind = triple.kind().unwrap_or(AnalysisType::Value);
    let cells = |name: &str| table.column(name).map(|c| c.values.clone()).unwrap_or_default();
    match kind {
        AnalysisType::Compare | AnalysisType::Trend => triple.column().map(cells).unwrap_or_default(),
        AnalysisType::Correlated => {
            let mut v = cells(triple.subject());
            v.extend(cells(triple.object()));
            v
        }
        _ => numeric_field(triple.object()).into_iter().collect(),
    }
}

fn names_of(triple: &RdfTriple) -> Vec<&str> {
    let mut names = Vec::new();
    if triple.kind() == Some(AnalysisType::Correlated) {
        names.push(triple.subject());
        names.push(triple.object());
    } else {
        names.extend(triple.column());
        names.push(triple.subject());
    }
    names
}

fn matches_view(view: &SentenceView, triple: &RdfTriple, table: &DataTable, dict: &TypeDictionary) -> bool {
    if triple.is_title() {
        return false;
    }
    let kind = triple.kind().unwrap_or(AnalysisType::Value);
    candidate_values(triple, table).iter().any(|v| view.mentions(*v))
        && names_of(triple).iter().any(|n| view.names(n))
        && dict.indicates(&view.words, kind)
}

/// The matching relation between a sentence and a single non-TITLE triple.
pub fn matches(sentence: &str, triple: &RdfTriple, table: &DataTable, dict: &TypeDictionary) -> bool {
    matches_view(&SentenceView::new(sentence), triple, table, dict)
}

/// One pair per sentence that matches at least one triple: all matching
/// triples plus the instance's TITLE triple.
pub fn build_pairs(inst: &WebpageInstance, dict: &TypeDictionary) -> Vec<MatchedPair> {
    build_pairs_with(inst, dict, &SubjectList::default())
}

pub fn build_pairs_with(inst: &WebpageInstance, dict: &TypeDictionary, subjects: &SubjectList) -> Vec<MatchedPair> {
    let (pool, _) = inst.triple_pool(subjects);
    let segment = inst.segment(subjects);
    let title = RdfTriple::title(&inst.title).expect("title validated on construction");
    split_sentences(&inst.summary)
        .into_iter()
        .filter_map(|sentence| {
            let view = SentenceView::new(&sentence);
            let matched: Vec<RdfTriple> = pool
                .iter()
                .filter(|t| matches_view(&view, t, &inst.table, dict))
                .cloned()
                .collect();
            if matched.is_empty() {
                return None;
            }
            let insight_types = matched
                .iter()
                .map(|t| t.kind().unwrap_or(AnalysisType::Value))
                .collect();
            let mut triples = matched;
            triples.push(title.clone());
            Some(MatchedPair {
                sentence,
                triples: TripleSet::new(triples).expect("non-empty, title last"),
                insight_types,
                segment: Some(segment.clone()),
            })
        })
        .collect()
}

/// Count per type; a pair with several types counts once for each.
pub fn type_distribution(pairs: &[MatchedPair]) -> BTreeMap<AnalysisType, usize> {
    let mut counts: BTreeMap<AnalysisType, usize> = AnalysisType::ALL.into_iter().map(|t| (t, 0)).collect();
    for p in pairs {
        for t in &p.insight_types {
            *counts.entry(*t).or_default() += 1;
        }
    }
    counts
}
