//! Rule-based composition of selected insights into one report paragraph.

use crate::analytics::AnalysisType;
use crate::faithfulness::FaithfulnessScorer;
use crate::realization::InsightCandidate;
use crate::table::TableContext;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::OnceLock;
use thiserror::Error;

pub const CONNECTIVES: [&str; 3] = ["Moreover,", "In addition,", "Notably,"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("no insights selected")]
    EmptySelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub title: String,
    pub body: String,
    pub insight_ids: Vec<String>,
    pub created_at: DateTime<Utc>,
    /// The body's sentences, aligned with `insight_ids`.
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ExportFormat {
    Plain,
    Markdown,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(ExportFormat::Plain),
            "markdown" | "md" => Ok(ExportFormat::Markdown),
            other => Err(format!("unknown export format {other:?}")),
        }
    }
}

fn priority(t: AnalysisType) -> u8 {
    use AnalysisType::*;
    match t {
        Value | MostRecent => 0,
        Max | Min | Ranked => 1,
        Compare | Trend | Correlated => 2,
        Sum | Average => 3,
    }
}

/// Trailing punctuation collapsed to a single period.
pub fn normalize_terminal(sentence: &str) -> String {
    let core = sentence
        .trim()
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?' | ';' | ':' | ',') || c.is_whitespace());
    format!("{core}.")
}

fn strip_title<'a>(sentence: &'a str, title: &str) -> Option<&'a str> {
    if title.is_empty() {
        return None;
    }
    let rest = sentence.strip_prefix(title)?;
    let rest = rest.trim_start_matches(|c: char| matches!(c, ':' | ',' | '-') || c.is_whitespace());
    // keep the title when it is the whole sentence or runs into a word
    if rest.is_empty() || rest.len() == sentence.len() - title.len() {
        return None;
    }
    Some(rest)
}

fn default_scorer() -> &'static FaithfulnessScorer {
    static SCORER: OnceLock<FaithfulnessScorer> = OnceLock::new();
    SCORER.get_or_init(FaithfulnessScorer::default)
}

fn report_id(title: &str, ids: &[String], body: &str) -> String {
    let mut h = Sha256::new();
    h.update(title.as_bytes());
    for id in ids {
        h.update([0x1f]);
        h.update(id.as_bytes());
    }
    h.update([0x1e]);
    h.update(body.as_bytes());
    format!("rep-{}", &hex::encode(h.finalize())[..16])
}

pub fn fuse(selected: &[InsightCandidate], ctx: &TableContext) -> Result<Report, FusionError> {
    fuse_at(selected, ctx, default_scorer(), Utc::now())
}

/// Orders by type priority (stable), states the title only in the opening
/// sentence, prefixes later sentences with cycling connectives and
/// normalizes terminal punctuation. A rewrite that would change a
/// sentence's faithfulness score against its triples is not applied.
pub fn fuse_at(
    selected: &[InsightCandidate],
    ctx: &TableContext,
    scorer: &FaithfulnessScorer,
    created_at: DateTime<Utc>,
) -> Result<Report, FusionError> {
    if selected.is_empty() {
        return Err(FusionError::EmptySelection);
    }
    let mut ordered: Vec<&InsightCandidate> = selected.iter().collect();
    ordered.sort_by_key(|c| priority(c.insight_type));

    let same_score = |c: &InsightCandidate, text: &str| match &c.triples {
        Some(ts) => {
            let before = scorer.score(&c.text, ts).map(|r| r.score).ok();
            let after = scorer.score(text, ts).map(|r| r.score).ok();
            before == after
        }
        None => true,
    };

    let mut sentences = Vec::with_capacity(ordered.len());
    for (i, c) in ordered.iter().enumerate() {
        let base = normalize_terminal(&c.text);
        if i == 0 {
            sentences.push(base);
            continue;
        }
        let connective = CONNECTIVES[(i - 1) % CONNECTIVES.len()];
        let plain = format!("{connective} {base}");
        let sentence = match strip_title(&base, &ctx.title) {
            Some(rest) => {
                let stripped = format!("{connective} {rest}");
                if same_score(c, &stripped) {
                    stripped
                } else {
                    plain
                }
            }
            None => plain,
        };
        sentences.push(sentence);
    }

    let insight_ids: Vec<String> = ordered.iter().map(|c| c.id.clone()).collect();
    let body = sentences.join(" ");
    Ok(Report {
        id: report_id(&ctx.title, &insight_ids, &body),
        title: ctx.title.clone(),
        body,
        insight_ids,
        created_at,
        sentences,
    })
}

pub fn export(r: &Report, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Plain => format!("{}\n\n{}\n", r.title, r.body),
        ExportFormat::Markdown => format!("# {}\n\n{}\n", r.title, r.body),
    }
    .into_bytes()
}
