use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

use shapeprog_core::llm::LlmError;
use shapeprog_core::pipeline::PipelineError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("{0}")]
    NotFound(String),
    #[error("a job is already running for this session")]
    Busy,
    #[error("{0}")]
    Unprocessable(String),
    #[error("provider failure: {0}")]
    Provider(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Busy => StatusCode::CONFLICT,
            ServiceError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Provider(_) => StatusCode::BAD_GATEWAY,
        }
    }
}

impl From<LlmError> for ServiceError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::BadVoteCount(_) => ServiceError::Unprocessable(e.to_string()),
            _ => ServiceError::Provider(e.to_string()),
        }
    }
}

impl From<PipelineError> for ServiceError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Llm(l) => l.into(),
            PipelineError::NoRequests => ServiceError::Provider(e.to_string()),
            PipelineError::Aep(a) => ServiceError::Unprocessable(a.to_string()),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(json!({ "error": self.to_string() }))).into_response()
    }
}
