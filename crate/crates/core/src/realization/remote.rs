//! Client for a remote neural realizer.
//!
//! Wire contract: `POST <url>` with `{"linearized": "..."}`, answered by
//! `{"text": "..."}`. In fixture mode responses come from a JSONL file of
//! `{"linearized": ..., "text": ...}` records instead.

use super::RealizeError;
use crate::rdf::TripleSet;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RealizerMode {
    Live,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizerEndpoint {
    pub url: String,
    #[serde(with = "millis")]
    pub timeout: Duration,
    pub mode: RealizerMode,
    pub fixture: Option<PathBuf>,
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

impl RealizerEndpoint {
    pub fn live(url: impl Into<String>) -> Self {
        RealizerEndpoint {
            url: url.into(),
            timeout: DEFAULT_TIMEOUT,
            mode: RealizerMode::Live,
            fixture: None,
        }
    }

    pub fn fixture(path: impl Into<PathBuf>) -> Self {
        RealizerEndpoint {
            url: String::new(),
            timeout: DEFAULT_TIMEOUT,
            mode: RealizerMode::Fixture,
            fixture: Some(path.into()),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub linearized: String,
    pub text: String,
}

#[derive(Serialize)]
struct RealizeRequest<'a> {
    linearized: &'a str,
}

#[derive(Deserialize)]
struct RealizeResponse {
    text: String,
}

/// A configured realizer. The fixture store is read once and never mutated.
#[derive(Debug, Clone)]
pub struct RemoteRealizer {
    endpoint: RealizerEndpoint,
    fixtures: HashMap<String, String>,
}

pub fn load_fixtures(path: &Path) -> Result<HashMap<String, String>, RealizeError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| RealizeError::Config(format!("{}: {e}", path.display())))?;
    let mut out = HashMap::new();
    for (i, line) in raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: FixtureRecord = serde_json::from_str(line)
            .map_err(|e| RealizeError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.insert(rec.linearized, rec.text);
    }
    Ok(out)
}

impl RemoteRealizer {
    pub fn new(endpoint: RealizerEndpoint) -> Result<Self, RealizeError> {
        let fixtures = match endpoint.mode {
            RealizerMode::Fixture => {
                let path = endpoint
                    .fixture
                    .as_deref()
                    .ok_or_else(|| RealizeError::Config("fixture mode needs a fixture file".into()))?;
                load_fixtures(path)?
            }
            RealizerMode::Live => {
                if endpoint.url.is_empty() {
                    return Err(RealizeError::Config("live mode needs a url".into()));
                }
                HashMap::new()
            }
        };
        Ok(RemoteRealizer { endpoint, fixtures })
    }

    pub fn endpoint(&self) -> &RealizerEndpoint {
        &self.endpoint
    }

    pub fn realize(&self, ts: &TripleSet) -> Result<String, RealizeError> {
        let linearized = ts.linearize();
        match self.endpoint.mode {
            RealizerMode::Fixture => self
                .fixtures
                .get(&linearized)
                .cloned()
                .ok_or(RealizeError::MissingFixture(linearized)),
            RealizerMode::Live => self.post(&linearized),
        }
    }

    fn post(&self, linearized: &str) -> Result<String, RealizeError> {
        let agent = ureq::AgentBuilder::new()
            .timeout(self.endpoint.timeout)
            .build();
        let resp = agent
            .post(&self.endpoint.url)
            .send_json(RealizeRequest { linearized })
            .map_err(|e| match e {
                ureq::Error::Transport(t) if is_timeout(&t) => RealizeError::Timeout,
                other => RealizeError::Remote(other.to_string()),
            })?;
        let body: RealizeResponse = resp
            .into_json()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock => RealizeError::Timeout,
                _ => RealizeError::Remote(e.to_string()),
            })?;
        let text = body.text.trim();
        if text.is_empty() {
            return Err(RealizeError::Remote("empty text".into()));
        }
        Ok(text.to_string())
    }
}

fn is_timeout(t: &ureq::Transport) -> bool {
    use std::error::Error;
    let mut source: Option<&(dyn Error + 'static)> = t.source();
    while let Some(err) = source {
        if let Some(io) = err.downcast_ref::<std::io::Error>() {
            if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
                return true;
            }
        }
        source = err.source();
    }
    t.to_string().to_lowercase().contains("timed out")
}

/// Realize through `ep`; see [`RemoteRealizer::realize`].
pub fn realize_remote(ts: &TripleSet, ep: &RealizerEndpoint) -> Result<String, RealizeError> {
    RemoteRealizer::new(ep.clone())?.realize(ts)
}
