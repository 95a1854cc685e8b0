use std::fmt;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lftab_core::ErrorCode;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Malformed request or arguments.
    Usage,
    NotFound,
    Conflict,
    /// The input was well formed but the operation failed on it.
    Domain,
    Internal,
}

/// An error with a stable code, shared by the command line and the service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(skip)]
    pub kind: Kind,
}

impl ApiError {
    pub fn new(kind: Kind, code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { code: code.into(), message: message.into(), kind }
    }

    pub fn domain<E: ErrorCode + fmt::Display>(e: E) -> Self {
        ApiError::new(Kind::Domain, e.code(), e.to_string())
    }

    pub fn usage(message: impl Into<String>) -> Self {
        ApiError::new(Kind::Usage, "BadRequest", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        ApiError::new(Kind::Domain, "Io", message)
    }

    pub fn status(&self) -> StatusCode {
        match self.kind {
            Kind::Usage => StatusCode::BAD_REQUEST,
            Kind::NotFound => StatusCode::NOT_FOUND,
            Kind::Conflict => StatusCode::CONFLICT,
            Kind::Domain => StatusCode::UNPROCESSABLE_ENTITY,
            Kind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Process exit status for the command line.
    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Usage => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a ApiError,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(Body { error: &self })).into_response()
    }
}
