use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tower_http::services::ServeDir;

use crate::model::{CreateSession, ErrorBody, SubmitAnswer};
use crate::service::Service;
use crate::ServiceError;

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::UnknownPool(_) | ServiceError::UnknownItem => {
                StatusCode::NOT_FOUND
            }
            ServiceError::UnknownExample(_)
            | ServiceError::UnknownAgent(_)
            | ServiceError::UnknownJudge(_)
            | ServiceError::EmptySlice
            | ServiceError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::PoolConflict(_) | ServiceError::Duplicate | ServiceError::NotServed => {
                StatusCode::CONFLICT
            }
            ServiceError::ChoiceOutOfRange { .. } | ServiceError::Agent(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::Config(_) | ServiceError::Io(_) | ServiceError::Replay(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code().to_string(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::InvalidRequest(e.body_text()))
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create(
    State(service): State<Arc<Service>>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let request = body(payload)?;
    // planning may run search agents over the whole slice
    let created = tokio::task::spawn_blocking(move || service.create_session(&request))
        .await
        .map_err(|e| ServiceError::Io(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn next(State(service): State<Arc<Service>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(service.next_item(&id)?).into_response())
}

async fn answer(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    payload: Result<Json<SubmitAnswer>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let submitted = body(payload)?;
    Ok(Json(service.submit_answer(&id, &submitted)?).into_response())
}

async fn report(State(service): State<Arc<Service>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(service.session_report(&id)?).into_response())
}

async fn pool_report(State(service): State<Arc<Service>>, Path(name): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(service.pool_report(&name)?).into_response())
}

/// All endpoints; unmatched paths fall through to `static_dir` when given.
pub fn router(service: Arc<Service>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/report", get(report))
        .route("/pools/{name}/report", get(pool_report))
        .with_state(service);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            port: 8080,
            data_dir: PathBuf::from("evarena-data"),
            static_dir: None,
        }
    }
}

impl ServeConfig {
    /// Defaults overridden by `EVARENA_PORT` and `EVARENA_DATA_DIR`.
    pub fn from_env() -> Result<Self, ServiceError> {
        let mut config = Self::default();
        if let Ok(port) = std::env::var("EVARENA_PORT") {
            config.port = port
                .parse()
                .map_err(|_| ServiceError::Config(format!("EVARENA_PORT `{port}` is not a port number")))?;
        }
        if let Ok(dir) = std::env::var("EVARENA_DATA_DIR") {
            config.data_dir = PathBuf::from(dir);
        }
        Ok(config)
    }
}

/// Bind and serve until ctrl-c.
pub async fn serve(service: Arc<Service>, config: &ServeConfig) -> Result<(), ServiceError> {
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::Io(format!("bind {addr}: {e}")))?;
    log::info!("listening on {addr}");
    axum::serve(listener, router(service, config.static_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Io(e.to_string()))
}
