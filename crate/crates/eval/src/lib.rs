//! Automatic metrics for RDF-to-text generation.

pub mod bleu;
pub mod chrf;
pub mod parent;
pub mod ter;
pub mod tokenize;

pub use bleu::{bleu, modified_precision};
pub use chrf::{chrf_pp, chrf_pp_beta};
pub use parent::parent;
pub use ter::ter;
pub use tokenize::tokenize;

use nbiig_core::rdf::{parse_linear, TripleSet};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("record {0} has no references")]
    NoReferences(usize),
    #[error("record {0} has no triples, PARENT needs them")]
    MissingTriples(usize),
    #[error("{path}:{line}: {message}")]
    Input { path: String, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub prediction: String,
    pub references: Vec<String>,
    pub triples: Option<TripleSet>,
}

impl EvalRecord {
    pub fn new<'a>(prediction: &str, references: impl IntoIterator<Item = &'a str>) -> Self {
        EvalRecord {
            prediction: prediction.to_string(),
            references: references.into_iter().map(str::to_string).collect(),
            triples: None,
        }
    }

    pub fn with_triples(mut self, ts: TripleSet) -> Self {
        self.triples = Some(ts);
        self
    }
}

/// One line of an evaluation input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalInput {
    pub prediction: String,
    pub references: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearized: Option<String>,
}

pub fn read_records(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    let err = |line: usize, message: String| EvalError::Input {
        path: path.display().to_string(),
        line,
        message,
    };
    let raw = std::fs::read_to_string(path).map_err(|e| err(0, e.to_string()))?;
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let input: EvalInput = serde_json::from_str(line).map_err(|e| err(i + 1, e.to_string()))?;
        if input.references.is_empty() {
            return Err(err(i + 1, "at least one reference is required".into()));
        }
        let triples = input
            .linearized
            .as_deref()
            .map(parse_linear)
            .transpose()
            .map_err(|e| err(i + 1, e.to_string()))?;
        out.push(EvalRecord {
            prediction: input.prediction,
            references: input.references,
            triples,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bleu: f64,
    pub ter: f64,
    pub chrfpp: f64,
    /// Absent when some record has no triples.
    pub parent: Option<f64>,
    pub n: usize,
}

pub fn evaluate(records: &[EvalRecord]) -> Result<EvalReport, EvalError> {
    let parent = if records.iter().all(|r| r.triples.is_some()) {
        Some(parent(records)?)
    } else {
        None
    };
    Ok(EvalReport {
        bleu: bleu(records)?,
        ter: ter(records)?,
        chrfpp: chrf_pp(records)?,
        parent,
        n: records.len(),
    })
}

impl EvalReport {
    /// Fixed-width table, one header row and one value row.
    pub fn to_table(&self) -> String {
        let parent = self.parent.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into());
        format!(
            "{:>8} {:>8} {:>8} {:>8} {:>8}\n{:>8} {:>8.2} {:>8.4} {:>8.2} {:>8}\n",
            "n", "BLEU", "TER", "chrF++", "PARENT", self.n, self.bleu, self.ter, self.chrfpp, parent
        )
    }
}
