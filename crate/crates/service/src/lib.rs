//! REST service and command-line front end for the insight loop: table
//! upload, candidate generation, editing, selection, report fusion and
//! export, with sessions and feedback persisted as JSON files.

pub mod api;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod service;
pub mod store;

pub use api::router;
pub use config::StoreConfig;
pub use engine::{Analysis, ContextInput, Engine};
pub use error::{ErrorPayload, ServiceError};
pub use service::{CandidateView, FeedbackInput, InsightsView, NewSession, Service, Session, SessionView};
