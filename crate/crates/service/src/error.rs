use nbiig_core::realization::RealizeError;
use nbiig_core::table::TableError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("unknown insight {0:?}")]
    UnknownInsight(String),
    #[error("unknown report {0:?}")]
    UnknownReport(String),
    #[error("no insights selected")]
    EmptySelection,
    #[error("{0}")]
    Validation(String),
    #[error("idempotency key {0:?} was used for a different request")]
    IdempotencyConflict(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("realizer: {0}")]
    Realizer(#[from] RealizeError),
    #[error("storage {path}: {message}")]
    Storage { path: String, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Wire form of every API error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ServiceError {
    pub fn storage(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        ServiceError::Storage {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Table(e) => e.code(),
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::UnknownInsight(_) => "UnknownInsight",
            ServiceError::UnknownReport(_) => "UnknownReport",
            ServiceError::EmptySelection => "EmptySelection",
            ServiceError::Validation(_) => "ValidationError",
            ServiceError::IdempotencyConflict(_) => "IdempotencyConflict",
            ServiceError::Config(_) => "ConfigError",
            ServiceError::Realizer(_) => "RealizerError",
            ServiceError::Storage { .. } => "StorageError",
            ServiceError::Internal(_) => "InternalError",
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ServiceError::Table(_) | ServiceError::EmptySelection | ServiceError::Validation(_) => 400,
            ServiceError::UnknownSession(_) | ServiceError::UnknownInsight(_) | ServiceError::UnknownReport(_) => 404,
            ServiceError::IdempotencyConflict(_) => 409,
            ServiceError::Realizer(_) => 502,
            ServiceError::Config(_) | ServiceError::Storage { .. } | ServiceError::Internal(_) => 500,
        }
    }

    pub fn detail(&self) -> Value {
        match self {
            ServiceError::Table(e) => table_detail(e),
            ServiceError::UnknownSession(id) => json!({ "session_id": id }),
            ServiceError::UnknownInsight(id) => json!({ "insight_id": id }),
            ServiceError::UnknownReport(id) => json!({ "report_id": id }),
            ServiceError::IdempotencyConflict(key) => json!({ "idempotency_key": key }),
            _ => Value::Null,
        }
    }

    pub fn payload(&self) -> ErrorPayload {
        ErrorPayload {
            code: self.code().to_string(),
            message: self.to_string(),
            detail: self.detail(),
        }
    }
}

fn table_detail(e: &TableError) -> Value {
    match e {
        TableError::RaggedRows { row, expected, found } => json!({ "row": row, "expected": expected, "found": found }),
        TableError::NonNumericCell { column, row, value } => json!({ "column": column, "row": row, "value": value }),
        TableError::TooFewRows { rows } => json!({ "rows": rows }),
        TableError::DuplicateColumnName(name) => json!({ "column": name }),
        TableError::LengthMismatch { column, expected, found } => {
            json!({ "column": column, "expected": expected, "found": found })
        }
        TableError::NonFinite { column, row } => json!({ "column": column, "row": row }),
        TableError::Csv(m) | TableError::InvalidContext(m) => json!({ "reason": m }),
        TableError::EmptyColumnName | TableError::NoValueColumns => Value::Null,
    }
}
