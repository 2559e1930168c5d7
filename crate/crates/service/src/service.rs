//! Session lifecycle over the file store. Session mutations hold that
//! session's lock; feedback appends hold one global lock.

use crate::config::StoreConfig;
use crate::engine::{ContextInput, Engine};
use crate::error::ServiceError;
use crate::store::{valid_id, Store, IDEMPOTENCY_DIR, REPORTS_DIR, SESSIONS_DIR};
use chrono::{DateTime, Utc};
use nbiig_core::analytics::AnalysisType;
use nbiig_core::fusion::{export, fuse_at, ExportFormat, Report};
use nbiig_core::rdf::{RdfTriple, TripleSet};
use nbiig_core::realization::{CandidateSource, InsightCandidate};
use nbiig_core::recommender::{rec_score, update_preferences, FeedbackAction, FeedbackEvent, PreferenceModel};
use nbiig_core::table::{parse_csv, DataTable, TableContext, TableShape};
use nbiig_corpus::matches;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeSet, HashSet};
use std::sync::Mutex;

pub const PREVIEW_ROWS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub table: DataTable,
    pub context: TableContext,
    pub shape: TableShape,
    pub candidates: Vec<InsightCandidate>,
    /// Ids chosen by the subject-aware recommender at upload time.
    pub recommended: Vec<String>,
    pub selections: BTreeSet<String>,
    pub report: Option<Report>,
}

impl Session {
    fn candidate_index(&self, id: &str) -> Result<usize, ServiceError> {
        self.candidates
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| ServiceError::UnknownInsight(id.to_string()))
    }

    pub fn view(&self, c: &InsightCandidate) -> CandidateView {
        CandidateView {
            candidate: c.clone(),
            linearized: c.triples.as_ref().map(TripleSet::linearize),
            recommended: self.recommended.contains(&c.id),
            selected: self.selections.contains(&c.id),
        }
    }

    pub fn insights(&self) -> InsightsView {
        InsightsView {
            session_id: self.id.clone(),
            candidates: self.candidates.iter().map(|c| self.view(c)).collect(),
            recommended: self.recommended.clone(),
            selections: self.selections.iter().cloned().collect(),
        }
    }

    pub fn to_view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            created_at: self.created_at,
            context: self.context.clone(),
            shape: self.shape,
            preview: TablePreview::of(&self.table),
            insights: self.insights(),
            report: self.report.clone(),
        }
    }
}

/// A candidate as the API returns it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    #[serde(flatten)]
    pub candidate: InsightCandidate,
    pub linearized: Option<String>,
    pub recommended: bool,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsightsView {
    pub session_id: String,
    pub candidates: Vec<CandidateView>,
    pub recommended: Vec<String>,
    pub selections: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePreview {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub total_rows: usize,
}

impl TablePreview {
    pub fn of(t: &DataTable) -> Self {
        let mut header = vec![t.x_name().to_string()];
        header.extend(t.y_columns().iter().map(|c| c.name.clone()));
        let rows = t
            .x_values()
            .iter()
            .take(PREVIEW_ROWS)
            .enumerate()
            .map(|(i, x)| {
                let mut row = vec![x.clone()];
                row.extend(t.y_columns().iter().map(|c| c.values[i].to_string()));
                row
            })
            .collect();
        TablePreview {
            header,
            rows,
            total_rows: t.row_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub context: TableContext,
    pub shape: TableShape,
    pub preview: TablePreview,
    pub insights: InsightsView,
    pub report: Option<Report>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewSession {
    pub csv: String,
    #[serde(default = "yes")]
    pub header: bool,
    pub context: ContextInput,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackInput {
    pub session_id: String,
    pub insight_id: String,
    pub action: FeedbackAction,
}

#[derive(Serialize, Deserialize)]
struct IdempotencyRecord {
    scope: String,
    fingerprint: String,
    response: serde_json::Value,
}

struct FeedbackState {
    prefs: PreferenceModel,
    last: Option<DateTime<Utc>>,
}

pub struct Service {
    engine: Engine,
    store: Store,
    feedback: Mutex<FeedbackState>,
}

fn sha_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

impl Service {
    /// Opens the data directory and replays the feedback log.
    pub fn open(cfg: &StoreConfig) -> Result<Self, ServiceError> {
        let engine = Engine::new(cfg)?;
        let store = Store::open(&cfg.data_dir)?;
        let log: Vec<FeedbackEvent> = store.read_lines()?;
        let prefs = update_preferences(&log).map_err(|e| ServiceError::storage(&store.feedback_path(), e))?;
        let last = log.last().map(|e| e.timestamp);
        Ok(Service {
            engine,
            store,
            feedback: Mutex::new(FeedbackState { prefs, last }),
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn preferences(&self) -> PreferenceModel {
        self.feedback.lock().unwrap_or_else(|e| e.into_inner()).prefs.clone()
    }

    /// Runs `op` at most once per idempotency key. A retry with the same key
    /// and request gets the stored response; a different request under the
    /// same key is a conflict.
    pub fn idempotent<T, R, F>(&self, key: Option<&str>, scope: &str, request: &R, op: F) -> Result<T, ServiceError>
    where
        T: Serialize + DeserializeOwned,
        R: Serialize,
        F: FnOnce() -> Result<T, ServiceError>,
    {
        let Some(key) = key else { return op() };
        let name = format!("idem-{}", &sha_hex(&[key.as_bytes()])[..32]);
        let lock = self.store.lock(&name);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let body = serde_json::to_vec(request).map_err(|e| ServiceError::Internal(e.to_string()))?;
        let fingerprint = sha_hex(&[scope.as_bytes(), &body]);
        if let Some(rec) = self.store.read::<IdempotencyRecord>(IDEMPOTENCY_DIR, &name)? {
            if rec.scope != scope || rec.fingerprint != fingerprint {
                return Err(ServiceError::IdempotencyConflict(key.to_string()));
            }
            return serde_json::from_value(rec.response).map_err(|e| ServiceError::Internal(e.to_string()));
        }
        let out = op()?;
        let response = serde_json::to_value(&out).map_err(|e| ServiceError::Internal(e.to_string()))?;
        self.store.write(
            IDEMPOTENCY_DIR,
            &name,
            &IdempotencyRecord {
                scope: scope.to_string(),
                fingerprint,
                response,
            },
        )?;
        Ok(out)
    }

    pub fn create_session(&self, req: &NewSession) -> Result<Session, ServiceError> {
        let table = parse_csv(req.csv.as_bytes(), req.header)?;
        let context = self.engine.context(&req.context)?;
        let analysis = self.engine.analyze(&table, &context, &self.preferences());
        let session = Session {
            id: format!("ses-{}", uuid::Uuid::new_v4().simple()),
            created_at: Utc::now(),
            table,
            context,
            shape: analysis.shape,
            candidates: analysis.candidates,
            recommended: analysis.recommended,
            selections: BTreeSet::new(),
            report: None,
        };
        self.store.write(SESSIONS_DIR, &session.id, &session)?;
        tracing::info!(session = %session.id, candidates = session.candidates.len(), "session created");
        Ok(session)
    }

    pub fn session(&self, id: &str) -> Result<Session, ServiceError> {
        self.store
            .read(SESSIONS_DIR, id)?
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn session_ids(&self) -> Result<Vec<String>, ServiceError> {
        self.store.list(SESSIONS_DIR)
    }

    fn with_session<R>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<R, ServiceError>) -> Result<R, ServiceError> {
        if !valid_id(id) {
            return Err(ServiceError::UnknownSession(id.to_string()));
        }
        let lock = self.store.lock(&format!("session:{id}"));
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut session = self.session(id)?;
        let out = f(&mut session)?;
        self.store.write(SESSIONS_DIR, id, &session)?;
        Ok(out)
    }

    fn score(&self, text: &str, triples: Option<&TripleSet>) -> f64 {
        triples
            .and_then(|ts| self.engine.scorer.score(text, ts).ok())
            .map(|r| r.score)
            .unwrap_or(0.0)
    }

    fn rec_score(&self, faithfulness: f64, t: AnalysisType) -> f64 {
        rec_score(faithfulness, self.preferences().weight(t), self.engine.recommend.alpha)
    }

    /// Replaces the text, re-scores against the original triples and logs
    /// an EDITED event.
    pub fn edit_insight(&self, session_id: &str, insight_id: &str, text: &str) -> Result<CandidateView, ServiceError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(ServiceError::Validation("insight text must be non-empty".into()));
        }
        let view = self.with_session(session_id, |s| {
            let i = s.candidate_index(insight_id)?;
            let faithfulness = self.score(text, s.candidates[i].triples.as_ref());
            let rec = self.rec_score(faithfulness, s.candidates[i].insight_type);
            let c = &mut s.candidates[i];
            c.text = text.to_string();
            c.source = CandidateSource::UserEdited;
            c.faithfulness = faithfulness;
            c.rec_score = rec;
            Ok(s.view(&s.candidates[i]))
        })?;
        self.log(&[(session_id, &view.candidate, FeedbackAction::Edited)])?;
        Ok(view)
    }

    /// Adds an analyst-written insight. Its triples are the session triples
    /// the sentence matches, plus the title; with no match it has none and
    /// scores 0.
    pub fn add_insight(
        &self,
        session_id: &str,
        text: &str,
        insight_type: Option<AnalysisType>,
    ) -> Result<CandidateView, ServiceError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(ServiceError::Validation("insight text must be non-empty".into()));
        }
        self.with_session(session_id, |s| {
            let mut seen = HashSet::new();
            let matched: Vec<RdfTriple> = s
                .candidates
                .iter()
                .filter_map(|c| c.triples.as_ref())
                .flat_map(|ts| ts.content().iter())
                .filter(|t| seen.insert((*t).clone()))
                .filter(|t| matches(text, t, &s.table, &self.engine.dictionary))
                .cloned()
                .collect();
            let triples = if matched.is_empty() {
                None
            } else {
                let mut all = matched;
                all.push(RdfTriple::title(&s.context.title).map_err(|e| ServiceError::Internal(e.to_string()))?);
                Some(TripleSet::new(all).map_err(|e| ServiceError::Internal(e.to_string()))?)
            };
            let insight_type = insight_type
                .or_else(|| triples.as_ref().and_then(|ts| ts.insight_type().analysis()))
                .unwrap_or(AnalysisType::Value);
            let faithfulness = self.score(text, triples.as_ref());
            let index = s.candidates.len().to_string();
            let id = format!("usr-{}", &sha_hex(&[s.id.as_bytes(), index.as_bytes(), text.as_bytes()])[..16]);
            let c = InsightCandidate {
                id,
                triples,
                insight_type,
                text: text.to_string(),
                faithfulness,
                rec_score: self.rec_score(faithfulness, insight_type),
                source: CandidateSource::UserAdded,
                salience: 0.0,
            };
            s.candidates.push(c);
            Ok(s.view(s.candidates.last().expect("just pushed")))
        })
    }

    /// Fuses the selection, persists the report and logs SELECTED for the
    /// chosen candidates and SHOWN for the rest.
    pub fn generate_report(&self, session_id: &str, selected_ids: &[String]) -> Result<Report, ServiceError> {
        if selected_ids.is_empty() {
            return Err(ServiceError::EmptySelection);
        }
        let (report, events) = self.with_session(session_id, |s| {
            let mut ids: Vec<&String> = Vec::new();
            for id in selected_ids {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            let chosen = ids
                .iter()
                .map(|id| s.candidate_index(id).map(|i| s.candidates[i].clone()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut report = fuse_at(&chosen, &s.context, &self.engine.scorer, Utc::now())
                .map_err(|_| ServiceError::EmptySelection)?;
            if let Some(prev) = self.store.read::<Report>(REPORTS_DIR, &report.id)? {
                if prev.body == report.body && prev.insight_ids == report.insight_ids {
                    report.created_at = prev.created_at;
                }
            }
            self.store.write(REPORTS_DIR, &report.id, &report)?;
            s.selections = ids.iter().map(|id| id.to_string()).collect();
            s.report = Some(report.clone());
            let mut events: Vec<(InsightCandidate, FeedbackAction)> =
                chosen.into_iter().map(|c| (c, FeedbackAction::Selected)).collect();
            events.extend(
                s.candidates
                    .iter()
                    .filter(|c| !s.selections.contains(&c.id))
                    .map(|c| (c.clone(), FeedbackAction::Shown)),
            );
            Ok((report, events))
        })?;
        let refs: Vec<(&str, &InsightCandidate, FeedbackAction)> =
            events.iter().map(|(c, a)| (session_id, c, *a)).collect();
        self.log(&refs)?;
        Ok(report)
    }

    pub fn report(&self, id: &str) -> Result<Report, ServiceError> {
        self.store
            .read(REPORTS_DIR, id)?
            .ok_or_else(|| ServiceError::UnknownReport(id.to_string()))
    }

    pub fn export_report(&self, id: &str, format: ExportFormat) -> Result<Vec<u8>, ServiceError> {
        Ok(export(&self.report(id)?, format))
    }

    /// Logs client feedback; types come from the session's candidates.
    pub fn record_feedback(&self, inputs: &[FeedbackInput]) -> Result<Vec<FeedbackEvent>, ServiceError> {
        let mut resolved = Vec::with_capacity(inputs.len());
        for input in inputs {
            let s = self.session(&input.session_id)?;
            let i = s.candidate_index(&input.insight_id)?;
            resolved.push((input.session_id.as_str(), s.candidates[i].clone(), input.action));
        }
        let refs: Vec<(&str, &InsightCandidate, FeedbackAction)> =
            resolved.iter().map(|(s, c, a)| (*s, c, *a)).collect();
        self.log(&refs)
    }

    /// Appends events stamped with a non-decreasing time and folds them
    /// into the preference model.
    fn log(&self, items: &[(&str, &InsightCandidate, FeedbackAction)]) -> Result<Vec<FeedbackEvent>, ServiceError> {
        let mut state = self.feedback.lock().unwrap_or_else(|e| e.into_inner());
        let now = Utc::now();
        let timestamp = state.last.map_or(now, |l| l.max(now));
        let events: Vec<FeedbackEvent> = items
            .iter()
            .map(|(session_id, c, action)| FeedbackEvent {
                timestamp,
                session_id: session_id.to_string(),
                insight_id: c.id.clone(),
                insight_type: c.insight_type,
                action: *action,
            })
            .collect();
        if events.is_empty() {
            return Ok(events);
        }
        self.store.append_lines(&events)?;
        state
            .prefs
            .apply(&events)
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        state.last = Some(timestamp);
        Ok(events)
    }
}
