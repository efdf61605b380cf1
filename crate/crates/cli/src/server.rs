//! HTTP/JSON review API over a [`ReviewSession`].
//!
//! - `GET /api/session`: split spec, queue size and progress
//! - `GET /api/next`: the next candidate, or `{"done": true}`
//! - `POST /api/judgment`: `{pair_id, alignment_index, verdict, judge?}`
//! - `GET /api/progress`: pool sizes against volumes
//!
//! Judgments are written to the session's log before the response is sent.
//! Static UI assets are served at `/` when a directory is configured.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lectalign::dataset::{Judgment, Next, ReviewSession, Verdict};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

pub struct AppState {
    session: Mutex<ReviewSession>,
    default_judge: String,
}

impl AppState {
    pub fn new(session: ReviewSession, default_judge: impl Into<String>) -> Arc<Self> {
        Arc::new(AppState {
            session: Mutex::new(session),
            default_judge: default_judge.into(),
        })
    }

    pub fn with_session<T>(&self, f: impl FnOnce(&ReviewSession) -> T) -> T {
        f(&self.session.lock().expect("session lock poisoned"))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgmentBody {
    pair_id: String,
    alignment_index: usize,
    verdict: Verdict,
    judge: Option<String>,
}

const PLACEHOLDER: &str = "<!doctype html><html><head><meta charset=\"utf-8\"><title>lectalign review</title></head>\
<body><p>No review UI assets configured. The JSON API is available under <code>/api</code>.</p></body></html>";

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/session", get(session))
        .route("/api/next", get(next))
        .route("/api/judgment", post(judgment))
        .route("/api/progress", get(progress))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn session(State(state): State<Arc<AppState>>) -> Response {
    state.with_session(|s| {
        Json(json!({
            "spec": s.spec(),
            "queue_size": s.queue_len(),
            "progress": s.progress(),
        }))
        .into_response()
    })
}

async fn next(State(state): State<Arc<AppState>>) -> Response {
    state.with_session(|s| match s.next_candidate() {
        Next::Candidate(c) => Json(c).into_response(),
        Next::Done => Json(json!({ "done": true })).into_response(),
        Next::Exhausted => Json(json!({ "done": true, "exhausted": true })).into_response(),
    })
}

async fn progress(State(state): State<Arc<AppState>>) -> Response {
    state.with_session(|s| Json(s.progress()).into_response())
}

async fn judgment(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let body: JudgmentBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed judgment: {e}")),
    };
    let judge = body.judge.unwrap_or_else(|| state.default_judge.clone());
    let j = Judgment::now(body.pair_id, body.alignment_index, body.verdict, judge);
    let mut session = state.session.lock().expect("session lock poisoned");
    match session.record_judgment(j) {
        Ok(outcome) => Json(outcome).into_response(),
        Err(e @ lectalign::Error::UnknownPair(_)) => error(StatusCode::NOT_FOUND, e.to_string()),
        Err(e @ (lectalign::Error::Consumed(_) | lectalign::Error::Review(_))) => {
            error(StatusCode::CONFLICT, e.to_string())
        }
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Binds to localhost and serves until the process is stopped.
pub async fn serve(state: Arc<AppState>, ui_dir: Option<PathBuf>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    log::info!("review service on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, ui_dir)).await
}
