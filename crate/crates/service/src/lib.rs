//! HTTP front end for the RECAST engine.

pub mod api;
pub mod config;
pub mod feedback;

use std::future::IntoFuture;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::{Arc, OnceLock};

use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use recast_core::{ReferenceBackend, Thresholds, ToxicityBackend};
use thiserror::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use api::{
    AlternativesResponse, CandidateView, HealthResponse, ScoreResponse, SpanScoreResponse,
    TokenView, MAX_COMMENT_BYTES,
};
pub use config::{ConfigError, ConfigOverrides, ServiceConfig};
pub use feedback::{FeedbackError, FeedbackLog, FeedbackRecord};

/// Request bodies beyond this are rejected before parsing.
pub const MAX_BODY_BYTES: usize = 64 * 1024;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("failed to load model: {0}")]
    Load(#[from] recast_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("server task failed: {0}")]
    Join(#[from] tokio::task::JoinError),
    #[error("invalid CORS origin {0:?}")]
    Origin(String),
}

struct Inner {
    backend: OnceLock<Arc<dyn ToxicityBackend>>,
    thresholds: Thresholds,
    feedback: FeedbackLog,
}

/// Shared handler state. The backend slot starts empty; every endpoint
/// answers 503 until [`AppState::install_backend`] fills it.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(thresholds: Thresholds, feedback: FeedbackLog) -> Self {
        AppState {
            inner: Arc::new(Inner {
                backend: OnceLock::new(),
                thresholds,
                feedback,
            }),
        }
    }

    pub fn with_backend(
        backend: Arc<dyn ToxicityBackend>,
        thresholds: Thresholds,
        feedback: FeedbackLog,
    ) -> Self {
        let state = AppState::new(thresholds, feedback);
        state.install_backend(backend);
        state
    }

    /// Returns false if a backend was already installed.
    pub fn install_backend(&self, backend: Arc<dyn ToxicityBackend>) -> bool {
        self.inner.backend.set(backend).is_ok()
    }

    pub fn backend(&self) -> Option<Arc<dyn ToxicityBackend>> {
        self.inner.backend.get().cloned()
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.inner.thresholds
    }

    pub fn feedback(&self) -> &FeedbackLog {
        &self.inner.feedback
    }
}

pub fn cors_layer(origins: Option<&[String]>) -> Result<CorsLayer, ServeError> {
    let allow = match origins {
        None => AllowOrigin::any(),
        Some(list) => AllowOrigin::list(
            list.iter()
                .map(|o| HeaderValue::from_str(o).map_err(|_| ServeError::Origin(o.clone())))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/score", post(api::score))
        .route("/api/alternatives", post(api::alternatives))
        .route("/api/score-span", post(api::score_span_handler))
        .route("/api/feedback", post(api::feedback))
        .route("/api/health", get(api::health))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

/// Binds the port, starts answering immediately, then loads the model in the
/// background. Returns when the server stops or the model fails to load.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let feedback = FeedbackLog::spawn(config.feedback_log.clone(), config.feedback_queue)?;
    let state = AppState::new(config.thresholds, feedback);
    let app = router(state.clone()).layer(cors_layer(config.cors_origins.as_deref())?);

    let addr = SocketAddr::from((Ipv4Addr::UNSPECIFIED, config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    let server = tokio::spawn(axum::serve(listener, app).into_future());

    let paths = config.paths.clone();
    let loaded = tokio::task::spawn_blocking(move || ReferenceBackend::load(&paths)).await?;
    match loaded {
        Ok(backend) => {
            tracing::info!("model loaded");
            state.install_backend(Arc::new(backend));
        }
        Err(e) => {
            server.abort();
            return Err(e.into());
        }
    }
    server.await??;
    Ok(())
}
