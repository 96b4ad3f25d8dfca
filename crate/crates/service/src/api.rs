use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, NaiveDate, SubsecRound, Utc};
use serde::Deserialize;

use crate::judgments::now;
use crate::{Coders, Judgment, JudgmentLog, ServiceError, TaskIndex};

#[derive(Clone)]
pub struct AppState {
    pub index: Arc<TaskIndex>,
    pub log: Arc<JudgmentLog>,
    pub coders: Arc<Coders>,
}

impl AppState {
    pub fn new(index: TaskIndex, log: JudgmentLog, coders: Coders) -> Self {
        AppState {
            index: Arc::new(index),
            log: Arc::new(log),
            coders: Arc::new(coders),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/clusters", get(clusters))
        .route("/api/clusters/{id}/dates", get(dates))
        .route("/api/clusters/{id}/dates/{date}/tasks", get(tasks))
        .route("/api/videos/{id}/tweets", get(video_tweets))
        .route("/api/judgments", post(submit))
        .route("/api/export/codes.csv", get(export))
        .with_state(state)
}

/// Serve until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn clusters(State(s): State<AppState>) -> impl IntoResponse {
    Json(s.index.clusters())
}

async fn dates(State(s): State<AppState>, Path(id): Path<usize>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(s.index.dates(id)?))
}

#[derive(Deserialize)]
struct TaskQuery {
    min: Option<u32>,
}

async fn tasks(
    State(s): State<AppState>,
    Path((id, date)): Path<(usize, String)>,
    Query(q): Query<TaskQuery>,
) -> Result<impl IntoResponse, ServiceError> {
    let date: NaiveDate = date
        .parse()
        .map_err(|_| ServiceError::BadRequest(format!("{date:?} is not a YYYY-MM-DD date")))?;
    Ok(Json(s.index.list_tasks(id, date, q.min.unwrap_or(5))?))
}

async fn video_tweets(State(s): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(s.index.video_tweets(&id)?))
}

/// Body of a judgment submission. The coder comes from the bearer token.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Submission {
    video_id: String,
    v: bool,
    p: bool,
    n: bool,
    q: bool,
    cx: bool,
    #[serde(default)]
    coder_id: Option<u32>,
    /// RFC 3339; server time when absent.
    #[serde(default)]
    submitted_at: Option<String>,
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

async fn submit(
    State(s): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<impl IntoResponse, ServiceError> {
    let token = bearer(&headers).ok_or_else(|| ServiceError::Unauthorized("missing bearer token".into()))?;
    let coder_id = s
        .coders
        .coder_for(token)
        .ok_or_else(|| ServiceError::Unauthorized("unknown coder token".into()))?;
    let sub: Submission =
        serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(format!("malformed judgment: {e}")))?;
    if sub.coder_id.is_some_and(|c| c != coder_id) {
        return Err(ServiceError::Unauthorized(format!(
            "token belongs to coder {coder_id}, not {}",
            sub.coder_id.unwrap_or_default()
        )));
    }
    if !s.index.has_video(&sub.video_id) {
        return Err(ServiceError::Rejected(format!("unknown video {}", sub.video_id)));
    }
    let submitted_at = match &sub.submitted_at {
        None => now(),
        Some(raw) => DateTime::parse_from_rfc3339(raw)
            .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
            .map_err(|e| ServiceError::BadRequest(format!("submitted_at {raw:?}: {e}")))?,
    };
    let log = Arc::clone(&s.log);
    let judgment = Judgment {
        coder_id,
        video_id: sub.video_id,
        v: sub.v,
        p: sub.p,
        n: sub.n,
        q: sub.q,
        cx: sub.cx,
        submitted_at,
    };
    // the append blocks on fsync
    let stored = tokio::task::spawn_blocking(move || log.append(judgment))
        .await
        .map_err(|e| ServiceError::Internal(format!("append task failed: {e}")))??;
    Ok((StatusCode::CREATED, Json(stored)))
}

async fn export(State(s): State<AppState>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], s.log.export_csv())
}
