use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use tetrascope_core::{Error, ErrorClass};

/// Error body returned by every endpoint. `code` mirrors the command line
/// exit-code taxonomy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: ErrorClass::Argument.code(), message: message.into() }
    }

    pub fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self { status: StatusCode::UNPROCESSABLE_ENTITY, code, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { status: StatusCode::INTERNAL_SERVER_ERROR, code: ErrorClass::Io.code(), message: message.into() }
    }

    /// Maps an engine error. `unknown_is_404` selects 404 rather than 422 for
    /// unknown measure ids.
    pub fn from_core(err: Error, unknown_is_404: bool) -> Self {
        let class = err.class();
        let status = match (&err, class) {
            (Error::UnknownMeasure(_), _) if unknown_is_404 => StatusCode::NOT_FOUND,
            (_, ErrorClass::Io) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self { status, code: class.code(), message: err.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body<'a> {
            status: u16,
            code: &'a str,
            message: &'a str,
        }
        let body = Body { status: self.status.as_u16(), code: self.code, message: &self.message };
        (self.status, Json(body)).into_response()
    }
}
