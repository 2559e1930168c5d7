//! Which insights to show: everything (naive) or a seeded draw of 4-6 types
//! from the table's segment prior, each realized by its most extreme
//! candidate. Candidates are ranked by a blend of faithfulness and logged
//! user preference.

use crate::analytics::AnalysisType;
use crate::realization::InsightCandidate;
use crate::table::TableShape;
use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecommendError {
    #[error("no candidate has a type applicable to this table")]
    NoCandidates,
    #[error("feedback event {index} is older than the event before it")]
    OutOfOrderEvents { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentKey {
    pub is_time_series: bool,
    pub is_multi_column: bool,
    pub subject: String,
}

impl SegmentKey {
    pub fn new(shape: TableShape, subject: &str) -> Self {
        SegmentKey {
            is_time_series: shape.is_time_series,
            is_multi_column: shape.is_multi_column,
            subject: subject.to_string(),
        }
    }

    pub fn shape(&self) -> TableShape {
        TableShape {
            is_time_series: self.is_time_series,
            is_multi_column: self.is_multi_column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypePrior {
    pub segment: SegmentKey,
    pub probs: BTreeMap<AnalysisType, f64>,
}

impl TypePrior {
    /// Uniform over the types applicable to the segment's shape.
    pub fn uniform(segment: SegmentKey) -> Self {
        Self::smoothed(segment, &BTreeMap::new())
    }

    /// Add-one smoothing over the applicable types; inapplicable types get 0.
    pub fn smoothed(segment: SegmentKey, counts: &BTreeMap<AnalysisType, usize>) -> Self {
        let applicable = AnalysisType::applicable_types(segment.shape());
        let total: usize = applicable.iter().map(|t| counts.get(t).copied().unwrap_or(0)).sum();
        let denom = (total + applicable.len()) as f64;
        let probs = AnalysisType::ALL
            .into_iter()
            .map(|t| {
                let p = if applicable.contains(&t) {
                    (counts.get(&t).copied().unwrap_or(0) + 1) as f64 / denom
                } else {
                    0.0
                };
                (t, p)
            })
            .collect();
        TypePrior { segment, probs }
    }

    pub fn prob(&self, t: AnalysisType) -> f64 {
        self.probs.get(&t).copied().unwrap_or(0.0)
    }
}

/// Priors per segment. Segments never observed fall back to uniform.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<TypePrior>", into = "Vec<TypePrior>")]
pub struct PriorTable {
    priors: BTreeMap<SegmentKey, TypePrior>,
}

impl From<Vec<TypePrior>> for PriorTable {
    fn from(v: Vec<TypePrior>) -> Self {
        PriorTable {
            priors: v.into_iter().map(|p| (p.segment.clone(), p)).collect(),
        }
    }
}

impl From<PriorTable> for Vec<TypePrior> {
    fn from(t: PriorTable) -> Self {
        t.priors.into_values().collect()
    }
}

impl PriorTable {
    pub fn get(&self, key: &SegmentKey) -> TypePrior {
        self.priors
            .get(key)
            .cloned()
            .unwrap_or_else(|| TypePrior::uniform(key.clone()))
    }

    pub fn segments(&self) -> impl Iterator<Item = &SegmentKey> {
        self.priors.keys()
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }
}

/// Per-segment type frequencies. Each example counts once for every type it
/// carries.
pub fn estimate_priors<'a, I>(examples: I) -> PriorTable
where
    I: IntoIterator<Item = (&'a SegmentKey, &'a [AnalysisType])>,
{
    let mut counts: BTreeMap<SegmentKey, BTreeMap<AnalysisType, usize>> = BTreeMap::new();
    for (key, types) in examples {
        let seg = counts.entry(key.clone()).or_default();
        for t in types {
            *seg.entry(*t).or_default() += 1;
        }
    }
    PriorTable {
        priors: counts
            .into_iter()
            .map(|(k, c)| {
                let prior = TypePrior::smoothed(k.clone(), &c);
                (k, prior)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeedbackAction {
    Shown,
    Selected,
    Edited,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub timestamp: DateTime<Utc>,
    pub session_id: String,
    pub insight_id: String,
    pub insight_type: AnalysisType,
    pub action: FeedbackAction,
}

/// Laplace-smoothed selection rate per type: `(selected + 1) / (shown + 2)`.
/// SHOWN, SELECTED and REJECTED events all count as exposures.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PreferenceModel {
    pub weights: BTreeMap<AnalysisType, f64>,
    pub event_count: u64,
    shown: BTreeMap<AnalysisType, u64>,
    selected: BTreeMap<AnalysisType, u64>,
    last_timestamp: Option<DateTime<Utc>>,
}

impl PreferenceModel {
    pub fn weight(&self, t: AnalysisType) -> f64 {
        self.weights.get(&t).copied().unwrap_or(0.5)
    }

    pub fn shown(&self, t: AnalysisType) -> u64 {
        self.shown.get(&t).copied().unwrap_or(0)
    }

    pub fn selected(&self, t: AnalysisType) -> u64 {
        self.selected.get(&t).copied().unwrap_or(0)
    }

    /// Folds more events in. Rejects the whole batch when it is not ordered
    /// by timestamp or starts before events already applied.
    pub fn apply(&mut self, events: &[FeedbackEvent]) -> Result<(), RecommendError> {
        let mut last = self.last_timestamp;
        for (index, e) in events.iter().enumerate() {
            if last.is_some_and(|l| e.timestamp < l) {
                return Err(RecommendError::OutOfOrderEvents { index });
            }
            last = Some(e.timestamp);
        }
        for e in events {
            match e.action {
                FeedbackAction::Selected => {
                    *self.selected.entry(e.insight_type).or_default() += 1;
                    *self.shown.entry(e.insight_type).or_default() += 1;
                }
                FeedbackAction::Shown | FeedbackAction::Rejected => {
                    *self.shown.entry(e.insight_type).or_default() += 1;
                }
                FeedbackAction::Edited => {}
            }
        }
        self.event_count += events.len() as u64;
        self.last_timestamp = last;
        self.weights = AnalysisType::ALL
            .into_iter()
            .map(|t| (t, (self.selected(t) + 1) as f64 / (self.shown(t) + 2) as f64))
            .collect();
        Ok(())
    }
}

pub fn update_preferences(log: &[FeedbackEvent]) -> Result<PreferenceModel, RecommendError> {
    let mut m = PreferenceModel::default();
    m.apply(log)?;
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecommendConfig {
    /// Weight of faithfulness in `rec_score`; preference gets `1 - alpha`.
    pub alpha: f64,
    pub min_types: usize,
    pub max_types: usize,
}

impl Default for RecommendConfig {
    fn default() -> Self {
        RecommendConfig {
            alpha: 0.7,
            min_types: 4,
            max_types: 6,
        }
    }
}

pub fn rec_score(faithfulness: f64, preference: f64, alpha: f64) -> f64 {
    (alpha * faithfulness + (1.0 - alpha) * preference).clamp(0.0, 1.0)
}

fn score_and_sort(mut candidates: Vec<InsightCandidate>, prefs: &PreferenceModel, cfg: &RecommendConfig) -> Vec<InsightCandidate> {
    for c in &mut candidates {
        c.rec_score = rec_score(c.faithfulness, prefs.weight(c.insight_type), cfg.alpha);
    }
    // stable: equal scores keep input order
    candidates.sort_by(|a, b| b.rec_score.total_cmp(&a.rec_score));
    candidates
}

/// All candidates, scored and sorted.
pub fn recommend_naive(
    candidates: &[InsightCandidate],
    prefs: &PreferenceModel,
    cfg: &RecommendConfig,
) -> Vec<InsightCandidate> {
    score_and_sort(candidates.to_vec(), prefs, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    /// Types in the order they were drawn.
    pub sampled_types: Vec<AnalysisType>,
    /// One candidate per drawn type, sorted by `rec_score`.
    pub candidates: Vec<InsightCandidate>,
}

/// Seeded subject-aware recommendation.
pub fn recommend_detailed(
    shape: TableShape,
    candidates: &[InsightCandidate],
    prior: &TypePrior,
    prefs: &PreferenceModel,
    seed: u64,
    cfg: &RecommendConfig,
) -> Result<Recommendation, RecommendError> {
    let eligible: Vec<&InsightCandidate> = candidates
        .iter()
        .filter(|c| c.insight_type.applicable(shape))
        .collect();
    if eligible.is_empty() {
        return Err(RecommendError::NoCandidates);
    }
    let available: Vec<AnalysisType> = AnalysisType::ALL
        .into_iter()
        .filter(|t| eligible.iter().any(|c| c.insight_type == *t))
        .collect();
    let mut weighted: Vec<(AnalysisType, f64)> = available
        .iter()
        .map(|&t| (t, prior.prob(t)))
        .filter(|(_, p)| *p > 0.0)
        .collect();
    if weighted.is_empty() {
        weighted = available.iter().map(|&t| (t, 1.0)).collect();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng
        .random_range(cfg.min_types..=cfg.max_types)
        .min(weighted.len());
    let mut sampled_types = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = weighted.iter().map(|(_, w)| w).sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = weighted.len() - 1;
        for (i, (_, w)) in weighted.iter().enumerate() {
            if u < *w {
                pick = i;
                break;
            }
            u -= w;
        }
        sampled_types.push(weighted.remove(pick).0);
    }

    let chosen: Vec<InsightCandidate> = sampled_types
        .iter()
        .map(|t| {
            let mut best: Option<&InsightCandidate> = None;
            for c in eligible.iter().filter(|c| c.insight_type == *t) {
                if best.is_none_or(|b| c.salience > b.salience) {
                    best = Some(c);
                }
            }
            best.expect("sampled types come from eligible candidates").clone()
        })
        .collect();
    Ok(Recommendation {
        sampled_types,
        candidates: score_and_sort(chosen, prefs, cfg),
    })
}

pub fn recommend(
    shape: TableShape,
    candidates: &[InsightCandidate],
    prior: &TypePrior,
    prefs: &PreferenceModel,
    seed: u64,
    cfg: &RecommendConfig,
) -> Result<Vec<InsightCandidate>, RecommendError> {
    recommend_detailed(shape, candidates, prior, prefs, seed, cfg).map(|r| r.candidates)
}
