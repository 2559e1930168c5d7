//! Few-shot augmentation for under-represented insight types: 5-shot
//! prompts built from labeled pairs, and weak labels harvested from the
//! completions.

use crate::matching::MatchedPair;
use crate::CorpusError;
use nbiig_core::analytics::AnalysisType;
use nbiig_core::faithfulness::FaithfulnessScorer;
use nbiig_core::rdf::{parse_linear, SetType, TripleSet};
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const CONTEXT_SIZE: usize = 5;
pub const DEFAULT_PER_TYPE_CAP: usize = 2500;
/// Types with fewer labeled pairs than this get augmentation prompts.
pub const LOW_PRIOR_THRESHOLD: usize = 100;
pub const GENERATION_CUE: &str = "Insight:";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPrompt {
    /// `(linearized RDF, insight text)` pairs.
    pub context_pairs: Vec<(String, String)>,
    pub target: String,
    pub target_type: AnalysisType,
}

impl AugmentationPrompt {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (rdf, text) in &self.context_pairs {
            out.push_str(&format!("RDF: {rdf}\nInsight: {text}\n\n"));
        }
        out.push_str(&format!("RDF: {}\n{GENERATION_CUE}", self.target));
        out
    }
}

/// Inverse of [`AugmentationPrompt::render`]: context pairs and target.
pub fn parse_prompt(text: &str) -> Result<(Vec<(String, String)>, String), CorpusError> {
    let bad = |why: &str| CorpusError::MalformedPrompt(why.to_string());
    let (body, tail) = text.rsplit_once("\n\n").unwrap_or(("", text));
    let target = tail
        .strip_prefix("RDF: ")
        .and_then(|t| t.strip_suffix(&format!("\n{GENERATION_CUE}")))
        .ok_or_else(|| bad("missing target block"))?;
    let mut contexts = Vec::new();
    if !body.is_empty() {
        for block in body.split("\n\n") {
            let (rdf, insight) = block.split_once('\n').ok_or_else(|| bad("context block has one line"))?;
            let rdf = rdf.strip_prefix("RDF: ").ok_or_else(|| bad("context without RDF"))?;
            let insight = insight.strip_prefix("Insight: ").ok_or_else(|| bad("context without insight"))?;
            contexts.push((rdf.to_string(), insight.to_string()));
        }
    }
    Ok((contexts, target.to_string()))
}

fn labeled_of(labeled: &[MatchedPair], kind: AnalysisType) -> Vec<&MatchedPair> {
    labeled
        .iter()
        .filter(|p| p.triples.insight_type() == SetType::Analysis(kind))
        .collect()
}

/// Types with unlabeled targets but fewer than `threshold` labeled pairs.
pub fn low_prior_types(labeled: &[MatchedPair], unlabeled: &[TripleSet], threshold: usize) -> Vec<AnalysisType> {
    AnalysisType::ALL
        .into_iter()
        .filter(|t| labeled_of(labeled, *t).len() < threshold)
        .filter(|t| unlabeled.iter().any(|u| u.insight_type() == SetType::Analysis(*t)))
        .collect()
}

/// Prompts for one type: up to `cap` seeded-shuffled targets, each with 5
/// seeded-random contexts of the same type that differ from the target.
pub fn build_prompts_for_type(
    kind: AnalysisType,
    labeled: &[MatchedPair],
    unlabeled: &[TripleSet],
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<AugmentationPrompt>, CorpusError> {
    let pool: Vec<(String, &str)> = labeled_of(labeled, kind)
        .into_iter()
        .map(|p| (p.triples.linearize(), p.sentence.as_str()))
        .collect();
    if pool.len() < CONTEXT_SIZE {
        return Err(CorpusError::InsufficientContextPairs {
            kind,
            available: pool.len(),
        });
    }
    let mut targets: Vec<String> = unlabeled
        .iter()
        .filter(|u| u.insight_type() == SetType::Analysis(kind))
        .map(TripleSet::linearize)
        .collect();
    targets.shuffle(rng);
    targets.truncate(cap);

    let mut prompts = Vec::with_capacity(targets.len());
    for target in targets {
        let eligible: Vec<&(String, &str)> = pool.iter().filter(|(rdf, _)| *rdf != target).collect();
        if eligible.len() < CONTEXT_SIZE {
            return Err(CorpusError::InsufficientContextPairs {
                kind,
                available: eligible.len(),
            });
        }
        let context_pairs = index::sample(rng, eligible.len(), CONTEXT_SIZE)
            .into_iter()
            .map(|i| (eligible[i].0.clone(), eligible[i].1.to_string()))
            .collect();
        prompts.push(AugmentationPrompt {
            context_pairs,
            target,
            target_type: kind,
        });
    }
    Ok(prompts)
}

/// Prompts for every low-prior type, in type order.
pub fn build_augmentation_prompts(
    labeled: &[MatchedPair],
    unlabeled: &[TripleSet],
    per_type_cap: usize,
    seed: u64,
) -> Result<Vec<AugmentationPrompt>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for kind in low_prior_types(labeled, unlabeled, LOW_PRIOR_THRESHOLD) {
        out.extend(build_prompts_for_type(kind, labeled, unlabeled, per_type_cap, &mut rng)?);
    }
    Ok(out)
}

/// Text up to the first blank line, trimmed.
pub fn truncate_completion(response: &str) -> &str {
    let response = response.trim_start();
    let mut offset = 0;
    for line in response.split_inclusive('\n') {
        if line.trim().is_empty() {
            break;
        }
        offset += line.len();
    }
    response[..offset].trim()
}

pub fn harvest_weak_labels(
    prompts: &[AugmentationPrompt],
    responses: &[String],
) -> Result<Vec<MatchedPair>, CorpusError> {
    if prompts.len() != responses.len() {
        return Err(CorpusError::LengthMismatch {
            prompts: prompts.len(),
            responses: responses.len(),
        });
    }
    let mut out = Vec::new();
    for (p, r) in prompts.iter().zip(responses) {
        let text = truncate_completion(r);
        if text.is_empty() {
            continue;
        }
        let parsed = parse_linear(&p.target).map_err(|e| CorpusError::MalformedPrompt(e.to_string()))?;
        let triples = TripleSet::with_type(parsed.triples().to_vec(), SetType::Analysis(p.target_type))
            .map_err(|e| CorpusError::MalformedPrompt(e.to_string()))?;
        out.push(MatchedPair {
            sentence: text.split_whitespace().collect::<Vec<_>>().join(" "),
            triples,
            insight_types: BTreeSet::from([p.target_type]),
            segment: None,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLabel {
    pub pair: MatchedPair,
    pub faithfulness: f64,
    pub low_confidence: bool,
}

/// Scores weak labels against their target triples and flags those below
/// `min_score`.
pub fn rescore_weak_labels(pairs: Vec<MatchedPair>, scorer: &FaithfulnessScorer, min_score: f64) -> Vec<WeakLabel> {
    pairs
        .into_iter()
        .map(|pair| {
            let faithfulness = scorer.score(&pair.sentence, &pair.triples).map(|r| r.score).unwrap_or(0.0);
            WeakLabel {
                low_confidence: faithfulness < min_score,
                pair,
                faithfulness,
            }
        })
        .collect()
}
