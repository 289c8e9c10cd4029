use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value};

/// Stable machine-readable error codes. The string forms are part of the
/// API and listed in docs/api.md.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    MalformedBody,
    MalformedQuery,
    EmptyStroke,
    InvalidPoint,
    InvalidChoice,
    InvalidVote,
    UnknownSession,
    UnknownScreen,
    ImageMissing,
    EmptySketch,
    NoSearch,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::MalformedBody => "malformed_body",
            ErrorCode::MalformedQuery => "malformed_query",
            ErrorCode::EmptyStroke => "empty_stroke",
            ErrorCode::InvalidPoint => "invalid_point",
            ErrorCode::InvalidChoice => "invalid_choice",
            ErrorCode::InvalidVote => "invalid_vote",
            ErrorCode::UnknownSession => "unknown_session",
            ErrorCode::UnknownScreen => "unknown_screen",
            ErrorCode::ImageMissing => "image_missing",
            ErrorCode::EmptySketch => "empty_sketch",
            ErrorCode::NoSearch => "no_search",
            ErrorCode::Internal => "internal",
        }
    }

    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::MalformedBody
            | ErrorCode::MalformedQuery
            | ErrorCode::EmptyStroke
            | ErrorCode::InvalidPoint
            | ErrorCode::InvalidChoice
            | ErrorCode::InvalidVote => StatusCode::BAD_REQUEST,
            ErrorCode::UnknownSession | ErrorCode::UnknownScreen | ErrorCode::ImageMissing => {
                StatusCode::NOT_FOUND
            }
            ErrorCode::EmptySketch | ErrorCode::NoSearch => StatusCode::CONFLICT,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn body(&self) -> Value {
        json!({ "error": { "code": self.code.as_str(), "message": self.message } })
    }
}

impl From<sketchsearch::Error> for ApiError {
    fn from(e: sketchsearch::Error) -> Self {
        use sketchsearch::Error as E;
        let code = match &e {
            E::InvalidState(_) => ErrorCode::EmptySketch,
            E::InvalidInput(_) => ErrorCode::MalformedBody,
            _ => ErrorCode::Internal,
        };
        Self::new(code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self.body())).into_response()
    }
}
