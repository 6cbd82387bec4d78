//! The stateless addition service.
//!
//! One POST endpoint, `/process`, accepts a canonical wire request, runs the
//! scheme-appropriate ciphertext combine, and returns the canonical
//! response. The service holds no keys and keeps no state between requests;
//! every request is answered from its body alone. `/health` reports a build
//! identifier for readiness checks.
//!
//! Error contract: malformed bodies and unknown schemes are 400, payloads
//! over the configured limit are 413, semantically invalid payloads are 422
//! with the offending field path in the body.

use std::time::Duration;

use axum::extract::DefaultBodyLimit;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::{Map, Value};
use thiserror::Error;
use tokio::net::TcpListener;

use hecloud_core::cloud::combine;
use hecloud_core::wire::{decode_request, encode_response, WireError};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_PAYLOAD_BYTES: usize = 4 * 1024 * 1024;
pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(10);

/// Environment variable overriding the bind port.
pub const PORT_ENV_VAR: &str = "HECLOUD_PORT";

/// Name and version baked into the binary, reported by `/health`.
pub const BUILD_ID: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("port must be in 1..=65535")]
    InvalidPort,
    #[error("max payload must be at least 1024 bytes, got {got}")]
    MaxPayloadTooSmall { got: usize },
    #[error("invalid value `{value}` for {var}")]
    InvalidEnv { var: &'static str, value: String },
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("failed to bind: {0}")]
    Bind(std::io::Error),
    #[error("server error: {0}")]
    Io(std::io::Error),
}

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub port: u16,
    pub max_payload_bytes: usize,
    pub request_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            max_payload_bytes: DEFAULT_MAX_PAYLOAD_BYTES,
            request_timeout: DEFAULT_REQUEST_TIMEOUT,
        }
    }
}

impl ServiceConfig {
    pub fn new(port: u16) -> Result<Self, ConfigError> {
        let config = Self {
            port,
            ..Self::default()
        };
        config.validate()?;
        Ok(config)
    }

    /// Default config with the port taken from `HECLOUD_PORT` when set.
    pub fn from_env() -> Result<Self, ConfigError> {
        let mut config = Self::default();
        if let Ok(value) = std::env::var(PORT_ENV_VAR) {
            let port: u16 = value.parse().map_err(|_| ConfigError::InvalidEnv {
                var: PORT_ENV_VAR,
                value: value.clone(),
            })?;
            config.port = port;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.port == 0 {
            return Err(ConfigError::InvalidPort);
        }
        if self.max_payload_bytes < 1024 {
            return Err(ConfigError::MaxPayloadTooSmall {
                got: self.max_payload_bytes,
            });
        }
        Ok(())
    }
}

fn json_body(pairs: Vec<(&str, Value)>) -> String {
    debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert(k.to_string(), v);
    }
    serde_json::to_string(&Value::Object(map)).expect("error bodies always serialize")
}

fn error_response(err: &WireError) -> (StatusCode, String) {
    match err {
        WireError::Parse(reason) => (
            StatusCode::BAD_REQUEST,
            json_body(vec![
                ("error", Value::from("parse")),
                ("reason", Value::from(reason.as_str())),
            ]),
        ),
        WireError::UnknownScheme(scheme) => (
            StatusCode::BAD_REQUEST,
            json_body(vec![
                ("error", Value::from("scheme")),
                ("reason", Value::from(format!("unknown scheme `{scheme}`"))),
            ]),
        ),
        WireError::Validation { path, reason } => (
            StatusCode::UNPROCESSABLE_ENTITY,
            json_body(vec![
                ("error", Value::from("validation")),
                ("path", Value::from(path.as_str())),
                ("reason", Value::from(reason.as_str())),
            ]),
        ),
        WireError::Encode(reason) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            json_body(vec![
                ("error", Value::from("encode")),
                ("reason", Value::from(reason.as_str())),
            ]),
        ),
    }
}

fn as_json(status: StatusCode, body: String) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        body,
    )
        .into_response()
}

/// Decode, combine, encode. Pure; shared by the handler and tests.
pub fn process_document(body: &str) -> Result<String, WireError> {
    let request = decode_request(body)?;
    let response = combine(&request)?;
    encode_response(&response)
}

async fn process_handler(timeout: Duration, body: String) -> Response {
    let work = tokio::task::spawn_blocking(move || process_document(&body));
    match tokio::time::timeout(timeout, work).await {
        Err(_) => as_json(
            StatusCode::SERVICE_UNAVAILABLE,
            json_body(vec![
                ("error", Value::from("timeout")),
                ("reason", Value::from("request processing timed out")),
            ]),
        ),
        Ok(Err(join_err)) => as_json(
            StatusCode::INTERNAL_SERVER_ERROR,
            json_body(vec![
                ("error", Value::from("internal")),
                ("reason", Value::from(join_err.to_string())),
            ]),
        ),
        Ok(Ok(Ok(document))) => as_json(StatusCode::OK, document),
        Ok(Ok(Err(wire_err))) => {
            let (status, body) = error_response(&wire_err);
            as_json(status, body)
        }
    }
}

async fn health_handler() -> Response {
    (StatusCode::OK, BUILD_ID).into_response()
}

/// Routes: POST /process, GET /health. Anything else is 404, wrong methods
/// on known routes are 405, oversized bodies are 413.
pub fn router(config: &ServiceConfig) -> Router {
    let timeout = config.request_timeout;
    Router::new()
        .route(
            "/process",
            post(move |body: String| process_handler(timeout, body)),
        )
        .route("/health", get(health_handler))
        .layer(DefaultBodyLimit::max(config.max_payload_bytes))
}

/// Binds 0.0.0.0:port and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    config.validate()?;
    let listener = TcpListener::bind(("0.0.0.0", config.port))
        .await
        .map_err(ServeError::Bind)?;
    serve_on(listener, config).await
}

/// Serves on an already-bound listener (tests, socket activation).
pub async fn serve_on(listener: TcpListener, config: ServiceConfig) -> Result<(), ServeError> {
    config.validate()?;
    if let Ok(addr) = listener.local_addr() {
        eprintln!("{BUILD_ID} listening on {addr}");
    }
    axum::serve(listener, router(&config))
        .await
        .map_err(ServeError::Io)
}
