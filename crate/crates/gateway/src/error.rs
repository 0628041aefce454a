use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use fria_core::canonical::to_canonical_bytes;
use fria_core::reporting::{DocumentError, NotificationError};
use fria_core::WorkflowError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::store::StoreError;

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub details: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                details: Vec::new(),
            },
        }
    }

    pub fn with_details(mut self, details: Vec<Value>) -> Self {
        self.body.details = details;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn conflict(expected: u64, current: u64) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "conflict",
            format!("revision {expected} is stale; reload revision {current} and retry"),
        )
        .with_details(vec![json!({ "expected_revision": expected, "current_revision": current })])
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let bytes = to_canonical_bytes(&self.body).unwrap_or_default();
        let mut res = (self.status, bytes).into_response();
        res.headers_mut()
            .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
        res
    }
}

impl From<WorkflowError> for ApiError {
    fn from(e: WorkflowError) -> Self {
        let status = match e.code() {
            "stage_order" => StatusCode::CONFLICT,
            "not_found" => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.code(), e.to_string()).with_details(e.details())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError::not_found(e.to_string()),
            StoreError::Exists(_) => ApiError::new(StatusCode::CONFLICT, "exists", e.to_string()),
            StoreError::Conflict { expected, current } => ApiError::conflict(expected, current),
            StoreError::BadId(_) => ApiError::bad_request(e.to_string()),
            StoreError::Io(_) => {
                tracing::error!(error = %e, "store failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", "the document store failed")
            }
        }
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "bad_document", e.to_string())
    }
}

impl From<NotificationError> for ApiError {
    fn from(e: NotificationError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", e.to_string())
    }
}
