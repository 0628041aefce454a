use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use fria_core::fixtures::passport_profile;
use fria_gateway::{router, AppState, FsStore, MemoryStore};
use serde_json::json;
use tokio::sync::Barrier;
use tower::ServiceExt;

async fn send(app: Router, uri: String, rev: u64, body: Vec<u8>, gate: Arc<Barrier>) -> StatusCode {
    let req = Request::builder()
        .method(Method::POST)
        .uri(uri)
        .header(header::IF_MATCH, format!("\"{rev}\""))
        .body(Body::from(body))
        .unwrap();
    gate.wait().await;
    app.oneshot(req).await.unwrap().status()
}

async fn setup(app: &Router, id: &str) -> u64 {
    let create = Request::builder()
        .method(Method::POST)
        .uri("/api/v1/assessments")
        .body(Body::from(json!({"id": id, "jurisdiction": "IE"}).to_string()))
        .unwrap();
    assert_eq!(app.clone().oneshot(create).await.unwrap().status(), StatusCode::CREATED);
    let profile = Request::builder()
        .method(Method::PUT)
        .uri(format!("/api/v1/assessments/{id}/profile"))
        .header(header::IF_MATCH, "\"1\"")
        .body(Body::from(serde_json::to_vec(&passport_profile()).unwrap()))
        .unwrap();
    assert_eq!(app.clone().oneshot(profile).await.unwrap().status(), StatusCode::OK);
    2
}

async fn race(app: Router, trials: usize) {
    for t in 0..trials {
        let id = format!("race-{t}");
        let rev = setup(&app, &id).await;
        let uri = format!("/api/v1/assessments/{id}/answers");
        let gate = Arc::new(Barrier::new(2));
        let a = json!({"answers": [{"question_id": "Q2.3", "value": true}]}).to_string().into_bytes();
        let b = json!({"answers": [{"question_id": "Q2.3", "value": false}]}).to_string().into_bytes();
        let h1 = tokio::spawn(send(app.clone(), uri.clone(), rev, a, gate.clone()));
        let h2 = tokio::spawn(send(app.clone(), uri, rev, b, gate));
        let mut statuses = [h1.await.unwrap(), h2.await.unwrap()];
        statuses.sort();
        assert_eq!(statuses, [StatusCode::OK, StatusCode::CONFLICT], "trial {t}");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn exactly_one_of_two_racing_writes_wins_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    race(router(AppState::new(Arc::new(FsStore::open(dir.path()).unwrap()))), 100).await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn exactly_one_of_two_racing_writes_wins_in_memory() {
    race(router(AppState::new(Arc::new(MemoryStore::new()))), 100).await;
}
