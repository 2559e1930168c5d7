//! Table to ranked candidates, shared by the CLI and the REST service.

use crate::config::StoreConfig;
use crate::error::ServiceError;
use nbiig_core::analytics::AnalyticsConfig;
use nbiig_core::faithfulness::FaithfulnessScorer;
use nbiig_core::lexicon::TypeDictionary;
use nbiig_core::pipeline::generate_candidates;
use nbiig_core::realization::{InsightCandidate, RemoteRealizer};
use nbiig_core::recommender::{recommend, recommend_naive, PreferenceModel, PriorTable, RecommendConfig, SegmentKey};
use nbiig_core::table::{detect_shape, ChartKind, DataTable, SubjectList, TableContext, TableShape};
use serde::{Deserialize, Serialize};

/// User-supplied table context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextInput {
    pub title: String,
    #[serde(default)]
    pub subject: String,
    #[serde(default = "no_chart")]
    pub chart_kind: ChartKind,
}

fn no_chart() -> ChartKind {
    ChartKind::None
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub shape: TableShape,
    /// Every candidate, sorted by `rec_score`.
    pub candidates: Vec<InsightCandidate>,
    /// Ids picked by the subject-aware recommender.
    pub recommended: Vec<String>,
}

#[derive(Debug)]
pub struct Engine {
    pub realizer: Option<RemoteRealizer>,
    pub scorer: FaithfulnessScorer,
    pub dictionary: TypeDictionary,
    pub subjects: SubjectList,
    pub priors: PriorTable,
    pub analytics: AnalyticsConfig,
    pub recommend: RecommendConfig,
    pub seed: u64,
}

impl Engine {
    pub fn new(cfg: &StoreConfig) -> Result<Self, ServiceError> {
        let realizer = cfg.realizer.clone().map(RemoteRealizer::new).transpose()?;
        let priors = match &cfg.priors {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_slice(&bytes).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?
            }
            None => PriorTable::default(),
        };
        Ok(Engine {
            realizer,
            scorer: FaithfulnessScorer::default(),
            dictionary: TypeDictionary::default(),
            subjects: SubjectList::default(),
            priors,
            analytics: AnalyticsConfig::default(),
            recommend: RecommendConfig {
                alpha: cfg.alpha,
                ..RecommendConfig::default()
            },
            seed: cfg.seed,
        })
    }

    pub fn context(&self, input: &ContextInput) -> Result<TableContext, ServiceError> {
        Ok(TableContext::new(&input.title, &input.subject, input.chart_kind, &self.subjects)?)
    }

    pub fn analyze(&self, table: &DataTable, ctx: &TableContext, prefs: &PreferenceModel) -> Analysis {
        let shape = detect_shape(table);
        let generated = generate_candidates(table, ctx, self.realizer.as_ref(), &self.scorer, &self.analytics);
        let prior = self.priors.get(&SegmentKey::new(shape, &ctx.subject));
        let recommended = match recommend(shape, &generated, &prior, prefs, self.seed, &self.recommend) {
            Ok(chosen) => chosen.into_iter().map(|c| c.id).collect(),
            Err(e) => {
                tracing::warn!(error = %e, "no recommendation");
                Vec::new()
            }
        };
        Analysis {
            shape,
            candidates: recommend_naive(&generated, prefs, &self.recommend),
            recommended,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nbiig_core::analytics::AnalysisType;
    use nbiig_core::table::parse_csv;

    #[test]
    fn cheese_analysis_is_deterministic() {
        let engine = Engine::new(&StoreConfig::new("unused")).unwrap();
        let table = parse_csv(b"Year,Market cap\n1960,14.1\n2021,76.1\n2022,81.2", true).unwrap();
        let ctx = engine
            .context(&ContextInput {
                title: "Worldwide cheese market cap".into(),
                subject: "food".into(),
                chart_kind: ChartKind::Line,
            })
            .unwrap();
        let a = engine.analyze(&table, &ctx, &PreferenceModel::default());
        let b = engine.analyze(&table, &ctx, &PreferenceModel::default());
        assert_eq!(a, b);
        assert!(a.candidates.len() >= 5);
        assert!(a.candidates.iter().any(|c| c.insight_type == AnalysisType::Max && c.faithfulness == 1.0));
        assert!((4..=6).contains(&a.recommended.len()));
        assert!(a.candidates.windows(2).all(|w| w[0].rec_score >= w[1].rec_score));
    }
}
