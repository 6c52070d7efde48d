//! REST routes over the browsing engine.
//!
//! | method | path | body |
//! |---|---|---|
//! | `GET` | `/api/collections` | |
//! | `POST` | `/api/sessions` | `{"collection": name, "strategy": "none" \| "query" \| "resource"}` |
//! | `GET` | `/api/sessions/{id}?page=&page_size=` | |
//! | `POST` | `/api/sessions/{id}/actions` | `{"op": "add" \| "remove", "tag": label}` |
//! | `DELETE` | `/api/sessions/{id}` | |

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};
use uuid::Uuid;

use tagbrowse::{Collection, Strategy, UserAction};

use crate::error::ApiError;
use crate::session::{PageRequest, Session, SessionStore, SessionView};

/// Shared service state: read-only collections and the live sessions.
#[derive(Clone)]
pub struct AppState {
    collections: Arc<BTreeMap<String, Arc<Collection>>>,
    sessions: Arc<SessionStore>,
}

impl AppState {
    pub fn new(collections: impl IntoIterator<Item = Collection>, sessions: SessionStore) -> Self {
        let collections = collections
            .into_iter()
            .map(|c| (c.name().to_owned(), Arc::new(c)))
            .collect();
        AppState {
            collections: Arc::new(collections),
            sessions: Arc::new(sessions),
        }
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }

    pub fn collection(&self, name: &str) -> Option<&Arc<Collection>> {
        self.collections.get(name)
    }
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods(Any)
        .allow_headers(Any);
    Router::new()
        .route("/api/collections", get(list_collections))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session).delete(delete_session))
        .route("/api/sessions/{id}/actions", post(apply_action))
        .layer(cors)
        .with_state(state)
}

/// Periodically drops idle sessions until the runtime shuts down.
pub fn spawn_expiry(state: &AppState, every: Duration) -> tokio::task::JoinHandle<()> {
    let sessions = state.sessions.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            let dropped = sessions.expire_idle(Instant::now());
            if dropped > 0 {
                log::info!("expired {dropped} idle sessions");
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionInfo {
    pub name: String,
    pub fingerprint: String,
    pub resources: usize,
    pub tags: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CreateSession {
    pub collection: String,
    pub strategy: Strategy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Add,
    Remove,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionRequest {
    pub op: Op,
    pub tag: String,
}

#[derive(Debug, Deserialize)]
struct PageParams {
    page: Option<usize>,
    page_size: Option<usize>,
}

async fn list_collections(State(app): State<AppState>) -> Json<Vec<CollectionInfo>> {
    let list = app
        .collections
        .values()
        .map(|c| CollectionInfo {
            name: c.name().to_owned(),
            fingerprint: c.fingerprint().to_owned(),
            resources: c.n_resources(),
            tags: c.n_tags(),
        })
        .collect();
    Json(list)
}

async fn create_session(
    State(app): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let collection = app
        .collection(&req.collection)
        .ok_or_else(|| ApiError::collection_not_found(&req.collection))?
        .clone();
    let session = app.sessions.insert(Session::new(collection, req.strategy));
    let view = session.lock().unwrap().view(PageRequest::default());
    log::debug!("created session {} ({})", view.id, view.strategy);
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(app): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<PageParams>, QueryRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let page = PageRequest::new(params.page, params.page_size).map_err(ApiError::bad_request)?;
    let shared = lookup(&app, &id)?;
    let mut session = shared.lock().unwrap();
    session.touch();
    Ok(Json(session.view(page)))
}

async fn apply_action(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ActionRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let shared = lookup(&app, &id)?;
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let mut session = shared.lock().unwrap();
    let c = session.collection().clone();
    let sid = session.id();
    let tag = c
        .require_tag(&req.tag)
        .map_err(|e| ApiError::from_action_error(&c, sid, e))?;
    let action = match req.op {
        Op::Add => UserAction::Add(tag),
        Op::Remove => UserAction::Remove(tag),
    };
    session
        .apply(action)
        .map_err(|e| ApiError::from_action_error(&c, sid, e))?;
    Ok(Json(session.view(PageRequest::default())))
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let uuid = Uuid::parse_str(&id).map_err(|_| ApiError::session_not_found(&id))?;
    if app.sessions.remove(uuid) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::session_not_found(&id))
    }
}

fn lookup(app: &AppState, id: &str) -> Result<crate::session::SharedSession, ApiError> {
    Uuid::parse_str(id)
        .ok()
        .and_then(|uuid| app.sessions.get(uuid))
        .ok_or_else(|| ApiError::session_not_found(id))
}
