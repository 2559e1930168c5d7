//! Insight generation for business-intelligence tables.
//!
//! A [`DataTable`] goes through the analyses in [`analytics`], is cast to
//! RDF-style [`TripleSet`]s, realized as sentences, scored for
//! faithfulness, filtered by the [`recommender`] and finally fused into a
//! [`Report`].

pub mod analytics;
pub mod faithfulness;
pub mod fusion;
pub mod lexicon;
pub mod numfmt;
pub mod pipeline;
pub mod rdf;
pub mod realization;
pub mod recommender;
pub mod table;

pub use analytics::{run_all, AnalysisResult, AnalysisType, AnalyticsConfig, Detail, TrendDirection};
pub use faithfulness::{FaithfulnessReport, FaithfulnessScorer};
pub use fusion::{export, fuse, ExportFormat, Report};
pub use lexicon::TypeDictionary;
pub use pipeline::generate_candidates;
pub use rdf::{cast, linearize, parse_linear, RdfTriple, SetType, TripleSet};
pub use realization::{CandidateSource, InsightCandidate, RealizerEndpoint, RemoteRealizer};
pub use recommender::{
    recommend, recommend_naive, update_preferences, FeedbackAction, FeedbackEvent, PreferenceModel,
    PriorTable, RecommendConfig, SegmentKey, TypePrior,
};
pub use table::{detect_shape, parse_csv, ChartKind, DataTable, SubjectList, TableContext, TableShape};
