use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use emuc_core::Diagnostic;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("model rejected")]
    InvalidModel(Vec<Diagnostic>),
    #[error("no model in the request and no default model configured")]
    NoModel,
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown trigger `{0}`")]
    UnknownTrigger(String),
    #[error("{0}")]
    Trap(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::InvalidModel(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::NoModel | ApiError::BadRequest(_) | ApiError::UnknownTrigger(_) => {
                StatusCode::BAD_REQUEST
            }
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::Trap(_) => StatusCode::CONFLICT,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = match &self {
            ApiError::InvalidModel(diags) => json!({
                "error": self.to_string(),
                "diagnostics": diags,
            }),
            _ => json!({ "error": self.to_string() }),
        };
        (self.status(), Json(body)).into_response()
    }
}
