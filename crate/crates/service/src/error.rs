use std::path::PathBuf;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use funcprobe_core::annotate::AnnotateError;
use funcprobe_core::corpus::CorpusError;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown project `{0}`")]
    UnknownProject(String),
    #[error("project `{0}` already exists")]
    ProjectExists(String),
    #[error("unknown assignment `{0}`")]
    UnknownAssignment(String),
    #[error("assignment `{0}` was already submitted")]
    AlreadySubmitted(String),
    #[error("{message}")]
    Format { item_id: Option<String>, message: String },
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
}

impl ServiceError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ServiceError::Io { path: path.into(), source }
    }

    pub(crate) fn format(item_id: impl Into<String>, message: impl Into<String>) -> Self {
        ServiceError::Format { item_id: Some(item_id.into()), message: message.into() }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownProject(_) => "unknown_project",
            ServiceError::ProjectExists(_) => "project_exists",
            ServiceError::UnknownAssignment(_) => "unknown_assignment",
            ServiceError::AlreadySubmitted(_) => "conflict",
            ServiceError::Format { .. } => "format_violation",
            ServiceError::SchemaVersion(_) => "unsupported_schema",
            ServiceError::BadRequest(_) | ServiceError::Corpus(_) | ServiceError::Annotate(_) => "bad_request",
            ServiceError::Io { .. } | ServiceError::Corrupt { .. } => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownProject(_) | ServiceError::UnknownAssignment(_) => StatusCode::NOT_FOUND,
            ServiceError::ProjectExists(_) | ServiceError::AlreadySubmitted(_) => StatusCode::CONFLICT,
            ServiceError::Format { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::SchemaVersion(_)
            | ServiceError::BadRequest(_)
            | ServiceError::Corpus(_)
            | ServiceError::Annotate(_) => StatusCode::BAD_REQUEST,
            ServiceError::Io { .. } | ServiceError::Corrupt { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn item_id(&self) -> Option<String> {
        match self {
            ServiceError::Format { item_id, .. } => item_id.clone(),
            ServiceError::Annotate(
                AnnotateError::FormatMismatch { item_id, .. }
                | AnnotateError::UnknownItem(item_id)
                | AnnotateError::NoExpectedLabel(item_id),
            ) => Some(item_id.clone()),
            _ => None,
        }
    }
}

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_id: Option<String>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            log::error!("{self}");
        }
        let body = ErrorBody { code: self.code().into(), message: self.to_string(), item_id: self.item_id() };
        (self.status(), Json(body)).into_response()
    }
}
