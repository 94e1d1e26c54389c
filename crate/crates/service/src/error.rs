use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use siftsvc_core::ImageError;

/// An error body `{code, message, part?}` paired with its HTTP status.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub part: Option<String>,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    part: Option<&'a str>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            part: None,
        }
    }

    pub fn with_part(mut self, part: &str) -> Self {
        self.part = Some(part.to_owned());
        self
    }

    pub fn image(err: &ImageError, part: &str) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, err.code(), err.to_string()).with_part(part)
    }

    pub fn missing_part(part: &str) -> Self {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "missing-part",
            format!("multipart field {part:?} is required"),
        )
        .with_part(part)
    }

    pub fn out_of_range(field: &str, message: impl std::fmt::Display) -> Self {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "parameter-out-of-range",
            format!("{field}: {message}"),
        )
        .with_part(field)
    }

    pub fn invalid_parameter(field: &str, message: impl std::fmt::Display) -> Self {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid-parameter",
            format!("{field}: {message}"),
        )
        .with_part(field)
    }

    pub fn body(&self) -> String {
        serde_json::to_string(&Body {
            code: self.code,
            message: &self.message,
            part: self.part.as_deref(),
        })
        .expect("error body serializes")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            code: self.code,
            message: &self.message,
            part: self.part.as_deref(),
        };
        (self.status, Json(body)).into_response()
    }
}
