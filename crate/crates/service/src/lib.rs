//! HTTP service exposing detection and matching as JSON endpoints.
//!
//! Routes: `GET /health`, `POST /v1/detect`, `POST /v1/match`, and the web
//! client's static files under `/`. Bodies are produced by
//! [`siftsvc_core::report`], so they match the CLI's `--format json` output.

mod error;
mod handlers;
pub mod params;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use thiserror::Error;
use tokio::sync::Semaphore;

pub use error::ApiError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceLimits {
    /// Cap on the whole request body.
    pub max_upload_bytes: usize,
    pub max_pixels_per_side: usize,
    pub request_timeout: Duration,
}

impl Default for ServiceLimits {
    fn default() -> Self {
        ServiceLimits {
            max_upload_bytes: 16 * 1024 * 1024,
            max_pixels_per_side: 4096,
            request_timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub port: u16,
    pub limits: ServiceLimits,
    /// Upper bound on concurrently running detections; excess requests queue.
    pub workers: usize,
    /// Directory holding the web client. Without it a built-in page is served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            limits: ServiceLimits::default(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            static_dir: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{var}={value:?}: {reason}")]
pub struct EnvError {
    pub var: &'static str,
    pub value: String,
    pub reason: &'static str,
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, EnvError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    /// Reads `SIFTSVC_*` settings through `lookup`, falling back to defaults.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, EnvError> {
        fn positive<T: std::str::FromStr + PartialEq + Default>(
            lookup: &impl Fn(&str) -> Option<String>,
            var: &'static str,
        ) -> Result<Option<T>, EnvError> {
            let Some(value) = lookup(var) else {
                return Ok(None);
            };
            match value.trim().parse::<T>() {
                Ok(v) if v != T::default() => Ok(Some(v)),
                _ => Err(EnvError {
                    var,
                    value,
                    reason: "expected a positive integer",
                }),
            }
        }

        let mut config = ServiceConfig::default();
        if let Some(value) = lookup("SIFTSVC_PORT") {
            config.port = value.trim().parse().map_err(|_| EnvError {
                var: "SIFTSVC_PORT",
                value,
                reason: "expected a port number",
            })?;
        }
        if let Some(v) = positive(&lookup, "SIFTSVC_MAX_UPLOAD_BYTES")? {
            config.limits.max_upload_bytes = v;
        }
        if let Some(v) = positive(&lookup, "SIFTSVC_MAX_PIXELS_PER_SIDE")? {
            config.limits.max_pixels_per_side = v;
        }
        if let Some(v) = positive(&lookup, "SIFTSVC_REQUEST_TIMEOUT_SECS")? {
            config.limits.request_timeout = Duration::from_secs(v);
        }
        if let Some(v) = positive(&lookup, "SIFTSVC_WORKERS")? {
            config.workers = v;
        }
        config.static_dir = lookup("SIFTSVC_STATIC_DIR")
            .filter(|s| !s.is_empty())
            .map(PathBuf::from);
        Ok(config)
    }
}

pub(crate) struct AppState {
    pub limits: ServiceLimits,
    pub workers: Arc<Semaphore>,
}

pub fn router(config: &ServiceConfig) -> Router {
    let state = Arc::new(AppState {
        limits: config.limits,
        workers: Arc::new(Semaphore::new(config.workers.max(1))),
    });
    let api = Router::new()
        .route("/health", get(handlers::health))
        .route("/v1/detect", post(handlers::detect))
        .route("/v1/match", post(handlers::match_images))
        .layer(DefaultBodyLimit::max(config.limits.max_upload_bytes))
        .with_state(state);

    let app = match &config.static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api
            .route("/", get(handlers::index))
            .fallback(handlers::not_found),
    };
    app.layer(axum::middleware::from_fn(handlers::log_request))
}

/// Serves `router(config)` on `listener` until `shutdown` resolves, then
/// drains in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    config: &ServiceConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(config))
        .with_graceful_shutdown(shutdown)
        .await
}
