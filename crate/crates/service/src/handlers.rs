use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::multipart::{Multipart, MultipartError, MultipartRejection};
use axum::extract::{Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::Next;
use axum::response::{Html, IntoResponse, Response};
use axum::Json;
use siftsvc_core::report::{DetectResponse, MatchResponse, Precision};
use siftsvc_core::scale_space::ScaleSpaceError;
use siftsvc_core::{
    detect as run_detect, image_dimensions, load_image, match_descriptors, DetectError, Features,
    MatchConfig, RasterImage, SiftConfig,
};

use crate::error::ApiError;
use crate::params::{
    apply_detector_field, apply_matcher_field, validate_detector, validate_matcher,
};
use crate::{AppState, ServiceLimits, VERSION};

type Shared = State<Arc<AppState>>;
type QueryParams = Result<Query<HashMap<String, String>>, axum::extract::rejection::QueryRejection>;

pub async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let start = Instant::now();
    let response = next.run(req).await;
    log::info!(
        "{method} {path} {} {:.1}ms",
        response.status().as_u16(),
        start.elapsed().as_secs_f64() * 1e3
    );
    response
}

pub async fn health() -> Response {
    Json(serde_json::json!({ "status": "ok", "version": VERSION })).into_response()
}

pub async fn index() -> Html<&'static str> {
    Html(include_str!("index.html"))
}

pub async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such route")
}

fn json_body(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn precision(query: QueryParams) -> Result<Precision, ApiError> {
    let Query(params) = query.map_err(|e| ApiError::invalid_parameter("query", e.body_text()))?;
    let mut precision = Precision::default();
    for (key, value) in params {
        match key.as_str() {
            "precision" => {
                precision = value
                    .parse()
                    .map_err(|e: String| ApiError::invalid_parameter("precision", e))?
            }
            other => {
                return Err(ApiError::invalid_parameter(
                    other,
                    "unknown query parameter",
                ))
            }
        }
    }
    Ok(precision)
}

fn multipart_error(err: MultipartError) -> ApiError {
    if err.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload-too-large",
            "request body exceeds the upload limit",
        )
    } else {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "malformed-request",
            err.body_text(),
        )
    }
}

/// Named multipart parts in arrival order; names must be unique.
struct Form {
    parts: Vec<(String, Bytes)>,
}

impl Form {
    async fn read(multipart: Result<Multipart, MultipartRejection>) -> Result<Self, ApiError> {
        let mut multipart = multipart.map_err(|e| {
            ApiError::new(StatusCode::BAD_REQUEST, "malformed-request", e.body_text())
        })?;
        let mut parts: Vec<(String, Bytes)> = Vec::new();
        while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
            let name = field.name().unwrap_or_default().to_owned();
            if name.is_empty() {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "malformed-request",
                    "multipart part without a name",
                ));
            }
            let data = field.bytes().await.map_err(multipart_error)?;
            if parts.iter().any(|(n, _)| *n == name) {
                return Err(ApiError::invalid_parameter(&name, "given more than once"));
            }
            parts.push((name, data));
        }
        Ok(Form { parts })
    }

    fn take(&mut self, name: &str) -> Result<Bytes, ApiError> {
        let i = self
            .parts
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| ApiError::missing_part(name))?;
        Ok(self.parts.remove(i).1)
    }

    fn text_fields(&self) -> Result<Vec<(&str, &str)>, ApiError> {
        self.parts
            .iter()
            .map(|(name, data)| {
                std::str::from_utf8(data)
                    .map(|v| (name.as_str(), v))
                    .map_err(|_| ApiError::invalid_parameter(name, "value is not UTF-8 text"))
            })
            .collect()
    }
}

fn check_size(bytes: &[u8], part: &str, limits: &ServiceLimits) -> Result<(), ApiError> {
    let (w, h) = image_dimensions(bytes).map_err(|e| ApiError::image(&e, part))?;
    if w > limits.max_pixels_per_side || h > limits.max_pixels_per_side {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "image-too-large",
            format!(
                "{w}x{h} exceeds {} pixels per side",
                limits.max_pixels_per_side
            ),
        )
        .with_part(part));
    }
    Ok(())
}

fn decode(bytes: &[u8], part: &str) -> Result<RasterImage, ApiError> {
    load_image(bytes).map_err(|e| ApiError::image(&e, part))
}

fn detect_part(image: &RasterImage, part: &str, config: &SiftConfig) -> Result<Features, ApiError> {
    run_detect(image, config).map_err(|e| match e {
        DetectError::ScaleSpace(ScaleSpaceError::ImageTooSmall { .. }) => {
            ApiError::new(StatusCode::BAD_REQUEST, "image-too-small", e.to_string()).with_part(part)
        }
        DetectError::ScaleSpace(ScaleSpaceError::Config(c)) | DetectError::Config(c) => {
            ApiError::out_of_range(c.field, &c.message)
        }
        other => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "parameter-out-of-range",
            other.to_string(),
        ),
    })
}

/// Runs `job` on the blocking pool once a worker slot is free, bounded by the
/// request timeout.
async fn run_job<T: Send + 'static>(
    state: &AppState,
    job: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    let workers = state.workers.clone();
    let work = async move {
        let permit = workers
            .acquire_owned()
            .await
            .expect("semaphore is never closed");
        tokio::task::spawn_blocking(move || {
            let _permit = permit;
            job()
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
    };
    tokio::time::timeout(state.limits.request_timeout, work)
        .await
        .map_err(|_| {
            ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "timeout",
                format!("request exceeded {:?}", state.limits.request_timeout),
            )
        })?
}

pub async fn detect(
    State(state): Shared,
    query: QueryParams,
    multipart: Result<Multipart, MultipartRejection>,
) -> Result<Response, ApiError> {
    let precision = precision(query)?;
    let mut form = Form::read(multipart).await?;
    let image = form.take("image")?;

    let mut config = SiftConfig::default();
    for (name, value) in form.text_fields()? {
        if !apply_detector_field(&mut config, name, value)? {
            return Err(ApiError::invalid_parameter(name, "unknown field"));
        }
    }
    validate_detector(&config)?;
    check_size(&image, "image", &state.limits)?;

    let body = run_job(&state, move || {
        let raster = decode(&image, "image")?;
        let start = Instant::now();
        let features = detect_part(&raster, "image", &config)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(DetectResponse::new(
            raster.width(),
            raster.height(),
            &config.scale_space,
            &features,
            ms,
            precision,
        )
        .to_json())
    })
    .await?;
    Ok(json_body(body))
}

pub async fn match_images(
    State(state): Shared,
    query: QueryParams,
    multipart: Result<Multipart, MultipartRejection>,
) -> Result<Response, ApiError> {
    let precision = precision(query)?;
    let mut form = Form::read(multipart).await?;
    let image_a = form.take("image_a")?;
    let image_b = form.take("image_b")?;

    let mut config = SiftConfig::default();
    let mut matcher = MatchConfig::default();
    for (name, value) in form.text_fields()? {
        if !apply_detector_field(&mut config, name, value)?
            && !apply_matcher_field(&mut matcher, name, value)?
        {
            return Err(ApiError::invalid_parameter(name, "unknown field"));
        }
    }
    validate_detector(&config)?;
    validate_matcher(&matcher)?;
    check_size(&image_a, "image_a", &state.limits)?;
    check_size(&image_b, "image_b", &state.limits)?;

    let body = run_job(&state, move || {
        let a = decode(&image_a, "image_a")?;
        let b = decode(&image_b, "image_b")?;
        let start = Instant::now();
        let fa = detect_part(&a, "image_a", &config)?;
        let fb = detect_part(&b, "image_b", &config)?;
        let matches =
            match_descriptors(&fa.descriptors, &fb.descriptors, &matcher).map_err(|e| {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            })?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(MatchResponse::new(
            &fa,
            &fb,
            &matches,
            &config.scale_space,
            &matcher,
            ms,
            precision,
        )
        .to_json())
    })
    .await?;
    Ok(json_body(body))
}
