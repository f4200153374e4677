//! Wire error body and the mapping from every library error onto it.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use confplane_core::dissemination::QueryError;
use confplane_core::model::IdError;
use confplane_core::{
    ConflictingDiff, DisseminationError, ModelError, SchemaError, StoreError, VersionError, Violation,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    NotFound,
    AlreadyExists,
    ValidationFailed,
    MalformedInput,
    Conflict,
    NoMatch,
    /// Storage failures; not caused by the request.
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::AlreadyExists | ErrorCode::Conflict | ErrorCode::NoMatch => StatusCode::CONFLICT,
            ErrorCode::ValidationFailed => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::MalformedInput => StatusCode::BAD_REQUEST,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Vec<Violation>>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), details: None }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::MalformedInput, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    fn violations(message: String, details: Vec<Violation>) -> Self {
        Self { code: ErrorCode::ValidationFailed, message, details: Some(details) }
    }

    pub(crate) fn internal(message: String) -> Self {
        tracing::error!(%message, "request failed");
        Self::new(ErrorCode::Internal, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        crate::json_response(self.code.status(), &self)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::internal(e.to_string())
    }
}

impl From<IdError> for ApiError {
    fn from(e: IdError) -> Self {
        ApiError::malformed(e.to_string())
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        ApiError::malformed(e.to_string())
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        ApiError::malformed(e.to_string())
    }
}

impl From<ConflictingDiff> for ApiError {
    fn from(e: ConflictingDiff) -> Self {
        ApiError::new(ErrorCode::Conflict, e.to_string())
    }
}

impl From<SchemaError> for ApiError {
    fn from(e: SchemaError) -> Self {
        let message = e.to_string();
        match e {
            SchemaError::MalformedYaml(_) | SchemaError::UnsupportedYamlFeature(_) => ApiError::malformed(message),
            SchemaError::InvalidSchema(details) => ApiError::violations(message, details),
            SchemaError::AlreadyExists(_) => ApiError::new(ErrorCode::AlreadyExists, message),
            SchemaError::NotFound(_) => ApiError::not_found(message),
            SchemaError::Store(e) => e.into(),
        }
    }
}

impl From<VersionError> for ApiError {
    fn from(e: VersionError) -> Self {
        let message = e.to_string();
        match e {
            VersionError::AlreadyExists { .. } => ApiError::new(ErrorCode::AlreadyExists, message),
            VersionError::ValidationFailed(details) => ApiError::violations(message, details),
            VersionError::SchemaNotFound(_)
            | VersionError::NotFound { .. }
            | VersionError::DiffOperandNotFound { .. } => ApiError::not_found(message),
            VersionError::Schema(e) => e.into(),
            VersionError::Store(e) => e.into(),
        }
    }
}

impl From<DisseminationError> for ApiError {
    fn from(e: DisseminationError) -> Self {
        let message = e.to_string();
        match e {
            DisseminationError::AlreadyRegistered(_) => ApiError::new(ErrorCode::AlreadyExists, message),
            DisseminationError::NodeNotFound(_) | DisseminationError::ConfigNotFound { .. } => {
                ApiError::not_found(message)
            }
            DisseminationError::InvalidLabels(_) | DisseminationError::InvalidName { .. } => {
                ApiError::malformed(message)
            }
            DisseminationError::NoMatchingNodes { .. } => ApiError::new(ErrorCode::NoMatch, message),
            DisseminationError::Store(e) => e.into(),
        }
    }
}
