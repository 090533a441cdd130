//! HTTP front end: `POST /learn` and `GET /health`.
//!
//! Learning runs on the blocking pool, so health checks keep answering
//! while a request is being served.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use conceptlearn_core::problem::LearningProblemDocument;
use conceptlearn_core::LearningProblem;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::engine::{settings, AppError, Engine, LearnRequest, Learner};

pub const DEFAULT_RUNTIME_CAP_SECONDS: f64 = 30.0;

#[derive(Clone)]
struct AppState {
    engine: Arc<Engine>,
    runtime_cap: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnBody {
    learning_problem: LearningProblemDocument,
    #[serde(default)]
    learner: Learner,
    #[serde(default)]
    config: Map<String, Value>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    emit_sparql: bool,
    #[serde(default)]
    verbalize: bool,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_id: Option<String>,
}

#[derive(Serialize)]
struct Health {
    individuals: usize,
    classes: usize,
    roles: usize,
    status: &'static str,
}

/// `runtime_cap` bounds every request's `max_runtime_seconds`.
pub fn router(engine: Arc<Engine>, runtime_cap: f64) -> Router {
    Router::new()
        .route("/learn", post(learn))
        .route("/health", get(health))
        .with_state(AppState {
            engine,
            runtime_cap,
        })
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    let s = state.engine.statistics();
    Json(Health {
        individuals: s.individuals,
        classes: s.classes,
        roles: s.roles,
        status: "ok",
    })
}

fn error_id() -> String {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let millis = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    format!("{millis:x}-{:04x}", COUNTER.fetch_add(1, Ordering::Relaxed))
}

fn reply(status: StatusCode, body: ErrorBody) -> Response {
    (status, Json(body)).into_response()
}

fn error_response(e: AppError) -> Response {
    match e {
        AppError::Field { field, message } => reply(
            StatusCode::BAD_REQUEST,
            ErrorBody {
                error: message,
                field: Some(field),
                error_id: None,
            },
        ),
        AppError::Config(m) => reply(
            StatusCode::BAD_REQUEST,
            ErrorBody {
                error: m,
                field: None,
                error_id: None,
            },
        ),
        AppError::UnknownIndividual(x) => reply(
            StatusCode::UNPROCESSABLE_ENTITY,
            ErrorBody {
                error: format!("unknown individual {x}"),
                field: Some("learning_problem".into()),
                error_id: None,
            },
        ),
        other => {
            let id = error_id();
            eprintln!("error {id}: {other}");
            reply(
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorBody {
                    error: "internal error".into(),
                    field: None,
                    error_id: Some(id),
                },
            )
        }
    }
}

fn prepare(
    body: &[u8],
    runtime_cap: f64,
) -> Result<(LearnRequest, crate::engine::Settings), AppError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    let body: LearnBody = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        AppError::Field {
            field: if path == "." { "body".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    let problem =
        LearningProblem::from_document(body.learning_problem).map_err(|e| AppError::Field {
            field: "learning_problem".into(),
            message: e.to_string(),
        })?;
    let mut s = settings(body.learner, &body.config, body.seed)?;
    let runtime = s.max_runtime_seconds();
    *runtime = runtime.min(runtime_cap);
    let mut request = LearnRequest::new(problem, body.learner);
    request.overrides = body.config;
    request.seed = body.seed;
    request.emit_sparql = body.emit_sparql;
    request.verbalize = body.verbalize;
    Ok((request, s))
}

async fn learn(State(state): State<AppState>, body: Bytes) -> Response {
    let (request, s) = match prepare(&body, state.runtime_cap) {
        Ok(x) => x,
        Err(e) => return error_response(e),
    };
    let engine = state.engine.clone();
    match tokio::task::spawn_blocking(move || engine.learn_with(&request, s)).await {
        Ok(Ok(report)) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "application/json")],
            report.to_json(),
        )
            .into_response(),
        Ok(Err(e)) => error_response(e),
        Err(join) => error_response(AppError::Internal(join.to_string())),
    }
}
