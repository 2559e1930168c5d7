//! Surface realization: triple sets to insight sentences.

mod remote;
mod template;

pub use remote::{
    load_fixtures, realize_remote, FixtureRecord, RealizerEndpoint, RealizerMode, RemoteRealizer,
    DEFAULT_TIMEOUT,
};
pub use template::{realize_template, PATTERN_VERSION};

use crate::analytics::AnalysisType;
use crate::faithfulness::FaithfulnessScorer;
use crate::rdf::{SetType, TripleSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizeError {
    #[error("no template for insight type {0}")]
    UnknownType(String),
    #[error("triple set does not have the shape of a {0} set")]
    MalformedSet(String),
    #[error("realizer timed out")]
    Timeout,
    #[error("realizer error: {0}")]
    Remote(String),
    #[error("no recorded fixture for {0:?}")]
    MissingFixture(String),
    #[error("realizer configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CandidateSource {
    Template,
    Neural,
    UserEdited,
    UserAdded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsightCandidate {
    pub id: String,
    /// Absent only for user-added insights that match no computed triple.
    pub triples: Option<TripleSet>,
    pub insight_type: AnalysisType,
    pub text: String,
    pub faithfulness: f64,
    pub rec_score: f64,
    pub source: CandidateSource,
    /// Magnitude used to choose the most extreme candidate of a type.
    #[serde(default)]
    pub salience: f64,
}

/// Content-derived id: stable across runs for the same table and context.
pub fn candidate_id(insight_type: AnalysisType, ts: &TripleSet) -> String {
    let mut h = Sha256::new();
    h.update(insight_type.as_str().as_bytes());
    h.update([0x1f]);
    h.update(ts.linearize().as_bytes());
    format!("ins-{}", &hex::encode(h.finalize())[..16])
}

/// One candidate per set, in input order. Remote text is used when the
/// realizer answers; any remote failure falls back to the template.
pub fn realize_all(
    sets: &[TripleSet],
    realizer: Option<&RemoteRealizer>,
    scorer: &FaithfulnessScorer,
) -> Vec<InsightCandidate> {
    sets.iter()
        .map(|ts| {
            let insight_type = ts.insight_type().analysis().unwrap_or(AnalysisType::Value);
            let remote = realizer.map(|r| r.realize(ts));
            let (text, source) = match remote {
                Some(Ok(text)) => (text, CandidateSource::Neural),
                other => {
                    if let Some(Err(e)) = other {
                        tracing::warn!(error = %e, set = %ts, "remote realization failed, using template");
                    }
                    let text = realize_template(ts)
                        .unwrap_or_else(|_| ts.title().unwrap_or("Untitled").to_string());
                    (text, CandidateSource::Template)
                }
            };
            let faithfulness = match ts.insight_type() {
                SetType::TitleOnly => 0.0,
                SetType::Analysis(_) => scorer.score(&text, ts).map(|r| r.score).unwrap_or(0.0),
            };
            InsightCandidate {
                id: candidate_id(insight_type, ts),
                triples: Some(ts.clone()),
                insight_type,
                text,
                faithfulness,
                rec_score: 0.0,
                source,
                salience: 0.0,
            }
        })
        .collect()
}
