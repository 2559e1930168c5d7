//! JSONL files and the on-disk record shapes.

use crate::augment::AugmentationPrompt;
use crate::matching::MatchedPair;
use crate::CorpusError;
use nbiig_core::analytics::AnalysisType;
use nbiig_core::rdf::parse_linear;
use nbiig_core::recommender::SegmentKey;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CorpusError::Json {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CorpusError> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("records serialize");
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
    f.write_all(&out).map_err(|e| CorpusError::io(path, e))
}

/// A matched pair on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub linearized: String,
    pub text: String,
    pub types: Vec<AnalysisType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<SegmentKey>,
}

impl From<&MatchedPair> for PairRecord {
    fn from(p: &MatchedPair) -> Self {
        PairRecord {
            linearized: p.triples.linearize(),
            text: p.sentence.clone(),
            types: p.insight_types.iter().copied().collect(),
            segment: p.segment.clone(),
        }
    }
}

impl TryFrom<PairRecord> for MatchedPair {
    type Error = CorpusError;

    fn try_from(r: PairRecord) -> Result<Self, Self::Error> {
        Ok(MatchedPair {
            sentence: r.text,
            triples: parse_linear(&r.linearized).map_err(|e| CorpusError::InvalidInstance(e.to_string()))?,
            insight_types: r.types.into_iter().collect(),
            segment: r.segment,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub prompt: String,
    pub target_linearized: String,
    #[serde(rename = "type")]
    pub kind: AnalysisType,
}

impl From<&AugmentationPrompt> for PromptRecord {
    fn from(p: &AugmentationPrompt) -> Self {
        PromptRecord {
            prompt: p.render(),
            target_linearized: p.target.clone(),
            kind: p.target_type,
        }
    }
}
