use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use tagbrowse::browse::init_state;
use tagbrowse::sample::spanish_art;
use tagbrowse::simulator::{generate_session, rank_selectable};
use tagbrowse::synth::generate_synthetic_collection;
use tagbrowse::{Browser, Strategy, SynthParams, UserAction};
use tagbrowse_server::{router, AppState, SessionStore, SessionView};

const ART: &str = "prehistoric and protohistoric art in Spain";

fn app() -> Router {
    let synth = generate_synthetic_collection(&SynthParams {
        n_resources: 300,
        n_tags: 40,
        mean_tags_per_resource: 4.0,
        ..SynthParams::default()
    })
    .unwrap();
    router(AppState::new([spanish_art(), synth], SessionStore::default()))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn create(app: &Router, collection: &str, strategy: &str) -> SessionView {
    let (status, body) = call(
        app,
        Method::POST,
        "/api/sessions",
        Some(json!({ "collection": collection, "strategy": strategy })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    serde_json::from_value(body).unwrap()
}

async fn act(app: &Router, id: &str, op: &str, tag: &str) -> (StatusCode, Value) {
    call(
        app,
        Method::POST,
        &format!("/api/sessions/{id}/actions"),
        Some(json!({ "op": op, "tag": tag })),
    )
    .await
}

fn selectable_labels(v: &SessionView) -> Vec<&str> {
    v.selectable_tags.iter().map(|t| t.label.as_str()).collect()
}

#[tokio::test]
async fn lists_collections() {
    let app = app();
    let (status, body) = call(&app, Method::GET, "/api/collections", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = body.as_array().unwrap();
    assert_eq!(list.len(), 2);
    let art = list.iter().find(|c| c["name"] == ART).unwrap();
    assert_eq!(art["resources"], 6);
    assert_eq!(art["tags"], 11);
}

#[tokio::test]
async fn create_on_spanish_art() {
    let app = app();
    let v = create(&app, ART, "resource").await;
    assert_eq!(v.total_resources, 6);
    assert_eq!(v.selectable_tags.len(), 11);
    assert_eq!(v.strategy, Strategy::Resource);
    assert_eq!(&selectable_labels(&v)[..2], ["Prehistoric", "Protohistoric"]);
    assert_eq!(v.last_action_micros, None);
}

#[tokio::test]
async fn add_levant_then_cave_painting() {
    let app = app();
    let v = create(&app, ART, "query").await;
    let (status, body) = act(&app, &v.id, "add", "Levant").await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let v: SessionView = serde_json::from_value(body).unwrap();
    assert_eq!(v.total_resources, 2);
    let punic = v.selectable_tags.iter().find(|t| t.label == "Punic").unwrap();
    assert_eq!(punic.count, 1);
    assert!(v.last_action_micros.is_some());
    assert_eq!(v.last_action_hit, Some(false));

    let (_, body) = act(&app, &v.id, "add", "Cave-Painting").await;
    let v: SessionView = serde_json::from_value(body).unwrap();
    assert_eq!(v.active_tags, ["Levant", "Cave-Painting"]);
    assert_eq!(v.total_resources, 1);
    assert!(v.selectable_tags.is_empty());

    let (_, body) = act(&app, &v.id, "remove", "Cave-Painting").await;
    let v: SessionView = serde_json::from_value(body).unwrap();
    assert_eq!(v.active_tags, ["Levant"]);
    assert_eq!(v.last_action_hit, Some(true));
    assert_eq!(v.cache_stats.hits, 1);
}

#[tokio::test]
async fn invalid_action_is_conflict_and_keeps_state() {
    let app = app();
    let v = create(&app, ART, "resource").await;
    act(&app, &v.id, "add", "Cave-Painting").await;
    let (_, before) = call(&app, Method::GET, &format!("/api/sessions/{}", v.id), None).await;

    // Prehistoric annotates both remaining resources
    let (status, body) = act(&app, &v.id, "add", "Prehistoric").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "invalid_action");
    assert_eq!(body["detail"]["reason"], "not_selectable");
    assert_eq!(body["detail"]["tag"], "Prehistoric");
    assert!(!body["message"].as_str().unwrap().is_empty());

    let (status, body) = act(&app, &v.id, "remove", "Levant").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["detail"]["reason"], "not_active");

    let (status, body) = act(&app, &v.id, "add", "Baroque").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["detail"]["reason"], "unknown_tag");

    let (_, after) = call(&app, Method::GET, &format!("/api/sessions/{}", v.id), None).await;
    assert_eq!(before, after);
}

#[tokio::test]
async fn malformed_requests_are_bad_request() {
    let app = app();
    let v = create(&app, ART, "none").await;
    let uri = format!("/api/sessions/{}/actions", v.id);
    for body in [json!({ "op": "toggle", "tag": "Levant" }), json!({ "tag": "Levant" }), json!([1, 2])] {
        let (status, reply) = call(&app, Method::POST, &uri, Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(reply["error"], "bad_request");
    }
    let (status, _) = call(
        &app,
        Method::POST,
        "/api/sessions",
        Some(json!({ "collection": ART, "strategy": "fastest" })),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::GET, &format!("/api/sessions/{}?page=0", v.id), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::GET, &format!("/api/sessions/{}?page_size=x", v.id), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_ids_are_not_found() {
    let app = app();
    let (status, body) = call(&app, Method::GET, "/api/sessions/not-a-uuid", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "session_not_found");
    let ghost = "00000000-0000-4000-8000-000000000000";
    let (status, _) = act(&app, ghost, "add", "Levant").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, body) = call(
        &app,
        Method::POST,
        "/api/sessions",
        Some(json!({ "collection": "nowhere", "strategy": "query" })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "collection_not_found");
}

#[tokio::test]
async fn delete_ends_session() {
    let app = app();
    let v = create(&app, ART, "query").await;
    let uri = format!("/api/sessions/{}", v.id);
    let (status, _) = call(&app, Method::DELETE, &uri, None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::DELETE, &uri, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn reads_are_idempotent_and_pages_partition() {
    let app = app();
    let name = "synthetic-n300-t40-m4-s1-seed42";
    let v = create(&app, name, "resource").await;
    assert!(v.total_resources > 100);
    let uri = |p: usize| format!("/api/sessions/{}?page={p}&page_size=32", v.id);

    let (_, first) = call(&app, Method::GET, &uri(1), None).await;
    let (_, again) = call(&app, Method::GET, &uri(1), None).await;
    assert_eq!(first, again);

    let pages: usize = first["totalPages"].as_u64().unwrap() as usize;
    let mut ids = Vec::new();
    for p in 1..=pages + 1 {
        let (status, body) = call(&app, Method::GET, &uri(p), None).await;
        assert_eq!(status, StatusCode::OK);
        let page: SessionView = serde_json::from_value(body).unwrap();
        if p > pages {
            assert!(page.resources.is_empty());
        }
        ids.extend(page.resources.into_iter().map(|r| r.id));
    }
    assert_eq!(ids.len(), v.total_resources);
    let mut sorted = ids.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted, ids, "pages are ordered and disjoint");
}

#[tokio::test]
async fn views_match_the_library() {
    let app = app();
    let c = generate_synthetic_collection(&SynthParams {
        n_resources: 300,
        n_tags: 40,
        mean_tags_per_resource: 4.0,
        ..SynthParams::default()
    })
    .unwrap();
    let trace = generate_session(&c, 9, 60);
    for strategy in Strategy::ALL {
        let v = create(&app, c.name(), strategy.as_str()).await;
        let mut browser = Browser::new(&c, strategy);
        assert_eq!(browser.state(), &init_state(&c));
        for &action in &trace.actions {
            let (op, tag) = match action {
                UserAction::Add(t) => ("add", t),
                UserAction::Remove(t) => ("remove", t),
                UserAction::End => break,
            };
            let (status, body) = act(&app, &v.id, op, c.tag_label(tag)).await;
            assert_eq!(status, StatusCode::OK);
            browser.apply(action).unwrap();
            let view: SessionView = serde_json::from_value(body).unwrap();
            let state = browser.state();

            let active: Vec<&str> = state.active_order().iter().map(|&t| c.tag_label(t)).collect();
            assert_eq!(view.active_tags, active);
            let ranked: Vec<(String, u64)> = rank_selectable(&c, state)
                .into_iter()
                .map(|(t, n)| (c.tag_label(t).to_owned(), n))
                .collect();
            let shown: Vec<(String, u64)> = view.selectable_tags.into_iter().map(|t| (t.label, t.count)).collect();
            assert_eq!(shown, ranked);
            assert_eq!(view.total_resources as u64, state.filtered().len());
            let first_page: Vec<String> = state
                .filtered()
                .iter()
                .take(view.page_size)
                .map(|r| c.resource(r).unwrap().key.clone())
                .collect();
            let shown: Vec<String> = view.resources.into_iter().map(|r| r.id).collect();
            assert_eq!(shown, first_page);
        }
    }
}

#[tokio::test]
async fn cors_preflight_allowed() {
    let app = app();
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/api/sessions")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.status().is_success());
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}
