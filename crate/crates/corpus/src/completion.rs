//! Client for an external text-completion model.
//!
//! Wire contract: `POST <url>` with `{"prompt": "..."}`, answered by
//! `{"completion": "..."}`. Fixture mode replays a JSONL file of
//! `{"prompt": ..., "completion": ...}` records.

use crate::io::read_jsonl;
use crate::CorpusError;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub prompt: String,
    pub completion: String,
}

#[derive(Serialize)]
struct CompleteRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompleteResponse {
    completion: String,
}

#[derive(Debug, Clone)]
pub enum CompletionClient {
    Live { url: String, timeout: Duration },
    Fixture(HashMap<String, String>),
}

impl CompletionClient {
    pub fn live(url: impl Into<String>, timeout: Duration) -> Self {
        CompletionClient::Live {
            url: url.into(),
            timeout,
        }
    }

    pub fn fixture(path: &Path) -> Result<Self, CorpusError> {
        let records: Vec<CompletionRecord> = read_jsonl(path)?;
        Ok(CompletionClient::Fixture(
            records.into_iter().map(|r| (r.prompt, r.completion)).collect(),
        ))
    }

    pub fn complete(&self, prompt: &str) -> Result<String, CorpusError> {
        match self {
            CompletionClient::Fixture(map) => map
                .get(prompt)
                .cloned()
                .ok_or_else(|| CorpusError::Completion("no recorded completion for prompt".into())),
            CompletionClient::Live { url, timeout } => {
                let agent = ureq::AgentBuilder::new().timeout(*timeout).build();
                let resp = agent
                    .post(url)
                    .send_json(CompleteRequest { prompt })
                    .map_err(|e| CorpusError::Completion(e.to_string()))?;
                let body: CompleteResponse = resp
                    .into_json()
                    .map_err(|e| CorpusError::Completion(e.to_string()))?;
                Ok(body.completion)
            }
        }
    }

    /// One completion per prompt; a failed request yields an empty
    /// completion so that the harvest drops it.
    pub fn complete_all(&self, prompts: &[String]) -> Vec<String> {
        prompts
            .iter()
            .map(|p| {
                self.complete(p).unwrap_or_else(|e| {
                    tracing::warn!(error = %e, "completion failed");
                    String::new()
                })
            })
            .collect()
    }
}
