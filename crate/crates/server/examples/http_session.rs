//! Drives the REST API in-process: list collections, open a session,
//! add and remove tags, then close it. The same requests work against
//! `tagbrowse serve` with curl.

use axum::body::Body;
use axum::http::{header, Method, Request};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use tagbrowse::sample::spanish_art;
use tagbrowse_server::{router, AppState, SessionStore};

async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> anyhow::Result<Value> {
    let request = Request::builder()
        .method(method.clone())
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or_else(Body::empty, |v| Body::from(v.to_string())))?;
    let response = app.clone().oneshot(request).await?;
    let status = response.status();
    let bytes = response.into_body().collect().await?.to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes)? };
    println!("{method} {uri} -> {status}");
    Ok(value)
}

fn summary(view: &Value) {
    println!(
        "  active {}  resources {}  selectable {}  hit {}",
        view["activeTags"], view["totalResources"], view["selectableTags"].as_array().map_or(0, Vec::len), view["lastActionHit"]
    );
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let app = router(AppState::new([spanish_art()], SessionStore::default()));

    let collections = send(&app, Method::GET, "/api/collections", None).await?;
    let name = collections[0]["name"].as_str().unwrap_or_default().to_owned();

    let view = send(&app, Method::POST, "/api/sessions", Some(json!({"collection": name, "strategy": "resource"}))).await?;
    summary(&view);
    let id = view["id"].as_str().unwrap_or_default().to_owned();
    let actions = format!("/api/sessions/{id}/actions");

    for (op, tag) in [("add", "Prehistoric"), ("add", "Cave-Painting"), ("remove", "Prehistoric")] {
        summary(&send(&app, Method::POST, &actions, Some(json!({"op": op, "tag": tag}))).await?);
    }

    let refused = send(&app, Method::POST, &actions, Some(json!({"op": "add", "tag": "Punic"}))).await?;
    println!("  {}", refused["detail"]);

    send(&app, Method::DELETE, &format!("/api/sessions/{id}"), None).await?;
    Ok(())
}
