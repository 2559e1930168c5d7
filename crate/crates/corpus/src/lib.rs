//! Construction of the RDF-to-text corpus from crawled webpage instances.

pub mod augment;
pub mod build;
pub mod completion;
pub mod gold;
pub mod io;
pub mod matching;
pub mod sentences;
pub mod split;

pub use augment::{build_augmentation_prompts, harvest_weak_labels, AugmentationPrompt};
pub use build::{build_corpus, BuildOptions, CorpusSummary};
pub use matching::{build_pairs, matches, type_distribution, MatchedPair, WebpageInstance};
pub use sentences::split_sentences;
pub use split::{split_dataset, DatasetSplit};

use nbiig_core::analytics::AnalysisType;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("need at least 3 pairs to split, got {0}")]
    TooFewPairs(usize),
    #[error("{kind} has {available} labeled pairs, a 5-shot context needs 5")]
    InsufficientContextPairs { kind: AnalysisType, available: usize },
    #[error("{prompts} prompts but {responses} responses")]
    LengthMismatch { prompts: usize, responses: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("malformed prompt: {0}")]
    MalformedPrompt(String),
    #[error("completion failed: {0}")]
    Completion(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Json { path: String, line: usize, message: String },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
