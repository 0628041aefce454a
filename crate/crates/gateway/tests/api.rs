use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use fria_core::bridge::export_minimal_dpia;
use fria_core::fixtures::{passport_answers, passport_dpia, passport_profile, passport_risks};
use fria_core::reporting::{read_report_document, verify_notification, NotificationPayload};
use fria_gateway::{router, AppState, DocumentStore, FsStore, MemoryStore};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    etag: Option<u64>,
    bytes: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or(Value::Null)
    }
}

async fn call(app: &Router, method: Method, uri: &str, rev: Option<u64>, body: Option<Vec<u8>>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(rev) = rev {
        req = req.header(header::IF_MATCH, format!("\"{rev}\""));
    }
    let req = req
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let etag = res
        .headers()
        .get(header::ETAG)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim_matches('"').parse().ok());
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, etag, bytes }
}

fn body(v: Value) -> Option<Vec<u8>> {
    Some(serde_json::to_vec(&v).unwrap())
}

fn app() -> Router {
    router(AppState::new(Arc::new(MemoryStore::new())))
}

async fn create(app: &Router, id: &str) -> u64 {
    let r = call(app, Method::POST, "/api/v1/assessments", None, body(json!({"id": id, "jurisdiction": "IE"}))).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&r.bytes));
    r.etag.unwrap()
}

fn assert_error_shape(r: &Reply, status: StatusCode, code: &str) {
    assert_eq!(r.status, status, "{}", String::from_utf8_lossy(&r.bytes));
    let v = r.json();
    assert_eq!(v["code"], code);
    assert!(v["message"].is_string());
    assert!(v["details"].is_array());
}

#[tokio::test]
async fn create_get_and_profile_gives_required() {
    let app = app();
    let rev = create(&app, "pc").await;
    let got = call(&app, Method::GET, "/api/v1/assessments/pc", None, None).await;
    assert_eq!(got.status, StatusCode::OK);
    assert_eq!(got.etag, Some(rev));
    assert!(got.json()["assessment"].is_object());

    let profile = serde_json::to_value(passport_profile()).unwrap();
    let r = call(&app, Method::PUT, "/api/v1/assessments/pc/profile", Some(rev), body(profile)).await;
    assert_eq!(r.status, StatusCode::OK, "{}", String::from_utf8_lossy(&r.bytes));
    assert_eq!(r.etag, Some(rev + 1));
    let v = r.json();
    assert_eq!(v["necessity"]["outcome"], "Required");
    assert_eq!(v["stages"][0]["state"], "Complete");
}

#[tokio::test]
async fn mutations_need_a_current_revision() {
    let app = app();
    let rev = create(&app, "pc").await;
    let profile = serde_json::to_value(passport_profile()).unwrap();

    let missing = call(&app, Method::PUT, "/api/v1/assessments/pc/profile", None, body(profile.clone())).await;
    assert_error_shape(&missing, StatusCode::PRECONDITION_REQUIRED, "revision_required");

    let ok = call(&app, Method::PUT, "/api/v1/assessments/pc/profile", Some(rev), body(profile.clone())).await;
    assert_eq!(ok.status, StatusCode::OK);

    let before = call(&app, Method::GET, "/api/v1/assessments/pc", None, None).await;
    let stale = call(
        &app,
        Method::POST,
        "/api/v1/assessments/pc/answers",
        Some(rev),
        body(json!({"answers": [{"question_id": "Q2.3", "value": true}]})),
    )
    .await;
    assert_error_shape(&stale, StatusCode::CONFLICT, "conflict");
    assert_eq!(stale.json()["details"][0]["current_revision"], rev + 1);
    let after = call(&app, Method::GET, "/api/v1/assessments/pc", None, None).await;
    assert_eq!(before.bytes, after.bytes);
}

#[tokio::test]
async fn errors_use_the_common_body() {
    let app = app();
    let rev = create(&app, "pc").await;
    let r = call(&app, Method::POST, "/api/v1/assessments/pc/report", Some(rev), None).await;
    assert_error_shape(&r, StatusCode::CONFLICT, "stage_order");
    assert_eq!(r.json()["details"][0]["missing_stages"], json!([1, 2, 3, 4]));

    let r = call(&app, Method::GET, "/api/v1/assessments/ghost", None, None).await;
    assert_error_shape(&r, StatusCode::NOT_FOUND, "not_found");

    let r = call(&app, Method::POST, "/api/v1/assessments", None, Some(b"{nope".to_vec())).await;
    assert_error_shape(&r, StatusCode::BAD_REQUEST, "bad_request");

    let r = call(&app, Method::POST, "/api/v1/assessments", None, body(json!({"jurisdiction": "US"}))).await;
    assert_error_shape(&r, StatusCode::UNPROCESSABLE_ENTITY, "validation");

    let r = call(&app, Method::GET, "/api/v1/nothing-here", None, None).await;
    assert_error_shape(&r, StatusCode::NOT_FOUND, "not_found");

    let r = call(&app, Method::POST, "/api/v1/score", None, body(json!({"likelihood": 6, "severity": 1}))).await;
    assert_error_shape(&r, StatusCode::UNPROCESSABLE_ENTITY, "validation");
}

#[tokio::test]
async fn validation_errors_pass_through_with_paths() {
    let app = app();
    let rev = create(&app, "pc").await;
    let profile = serde_json::to_value(passport_profile()).unwrap();
    let rev = call(&app, Method::PUT, "/api/v1/assessments/pc/profile", Some(rev), body(profile))
        .await
        .etag
        .unwrap();
    let r = call(
        &app,
        Method::POST,
        "/api/v1/assessments/pc/answers",
        Some(rev),
        body(json!({"answers": [
            {"question_id": "Q2.6", "value": {"ghost": {"active": true, "intended": true, "informed": false}}}
        ]})),
    )
    .await;
    assert_error_shape(&r, StatusCode::UNPROCESSABLE_ENTITY, "validation");
    let details = r.json()["details"].clone();
    assert!(
        details
            .as_array()
            .unwrap()
            .iter()
            .any(|d| d["path"].as_str().is_some_and(|p| p.starts_with("involved_entities.interaction_context"))),
        "{details}"
    );
}

#[tokio::test]
async fn what_if_scoring_matches_the_matrix() {
    let app = app();
    let r = call(
        &app,
        Method::POST,
        "/api/v1/score",
        None,
        body(json!({"likelihood": 4, "severity": 4, "mitigations": [
            {"taxonomy_id": "m-prevent-reduce", "strategy": "Reduce", "likelihood_delta": 2, "severity_delta": 0}
        ]})),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK, "{}", String::from_utf8_lossy(&r.bytes));
    let v = r.json();
    assert_eq!(v["initial"], "VeryHigh");
    assert_eq!(v["residual"]["likelihood"], 2);
    assert_eq!(v["residual"]["level"], "High");
}

#[tokio::test]
async fn sessions_hold_the_assessment() {
    let app = app();
    let rev = create(&app, "pc").await;
    let s = call(&app, Method::POST, "/api/v1/assessments/pc/sessions", None, body(json!({"owner": "alice"}))).await;
    assert_eq!(s.status, StatusCode::CREATED);
    let sid = s.json()["session_id"].as_str().unwrap().to_string();

    let other =
        call(&app, Method::POST, "/api/v1/assessments/pc/sessions", None, body(json!({"owner": "bob"}))).await;
    assert_error_shape(&other, StatusCode::CONFLICT, "locked");

    let profile = serde_json::to_value(passport_profile()).unwrap();
    let anonymous = call(&app, Method::PUT, "/api/v1/assessments/pc/profile", Some(rev), body(profile.clone())).await;
    assert_error_shape(&anonymous, StatusCode::CONFLICT, "locked");

    let req = Request::builder()
        .method(Method::PUT)
        .uri("/api/v1/assessments/pc/profile")
        .header(header::IF_MATCH, format!("\"{rev}\""))
        .header("x-session-id", &sid)
        .body(Body::from(serde_json::to_vec(&profile).unwrap()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);

    let doc = call(&app, Method::GET, "/api/v1/assessments/pc", None, None).await.json();
    let last = doc["audit_log"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["actor"], "alice");

    let info = call(&app, Method::GET, &format!("/api/v1/sessions/{sid}"), None, None).await;
    assert_eq!(info.json()["revision"], rev + 1);
    let closed = call(&app, Method::DELETE, &format!("/api/v1/sessions/{sid}"), None, None).await;
    assert_eq!(closed.status, StatusCode::NO_CONTENT);
}

#[tokio::test]
async fn static_token_is_enforced_when_configured() {
    let app = router(AppState::new(Arc::new(MemoryStore::new())).with_token("s3cret"));
    let r = call(&app, Method::GET, "/api/v1/catalogs", None, None).await;
    assert_error_shape(&r, StatusCode::UNAUTHORIZED, "unauthorized");
    let req = Request::builder()
        .uri("/api/v1/catalogs")
        .header(header::AUTHORIZATION, "Bearer s3cret")
        .body(Body::empty())
        .unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::OK);
}

#[tokio::test]
async fn catalogs_are_listed_with_versions() {
    let app = app();
    let r = call(&app, Method::GET, "/api/v1/catalogs", None, None).await;
    let v = r.json();
    assert_eq!(v["versions"]["conditions"], "2025.1");
    assert_eq!(v["checksums"].as_object().unwrap().len(), v["versions"].as_object().unwrap().len());
    let q = call(&app, Method::GET, "/api/v1/catalogs/questionnaire", None, None).await;
    assert!(q.json()["questions"].as_array().unwrap().len() > 20);
    let none = call(&app, Method::GET, "/api/v1/catalogs/unknown", None, None).await;
    assert_eq!(none.status, StatusCode::NOT_FOUND);
}

/// Sends mutations with the latest revision it has seen.
struct Writer<'a> {
    app: &'a Router,
    rev: u64,
}

impl Writer<'_> {
    async fn send(&mut self, method: Method, uri: &str, payload: Option<Vec<u8>>) -> Reply {
        let r = call(self.app, method, uri, Some(self.rev), payload).await;
        assert!(r.status.is_success(), "{uri}: {}", String::from_utf8_lossy(&r.bytes));
        if let Some(e) = r.etag {
            self.rev = e;
        }
        r
    }
}

/// Walks the passport example through every stage over HTTP.
async fn passport_over_http(app: &Router, id: &str) -> (u64, Vec<u8>) {
    let mut w = Writer { app, rev: create(app, id).await };
    let base = format!("/api/v1/assessments/{id}");
    let profile = serde_json::to_value(passport_profile()).unwrap();
    w.send(Method::PUT, &format!("{base}/profile"), body(profile)).await;
    let up = w
        .send(Method::POST, &format!("{base}/dpia"), Some(export_minimal_dpia(&passport_dpia())))
        .await;
    assert!(up.json()["prefill"]["provenance"]["involved_data.inputs"].is_object());
    let answers: Vec<Value> = passport_answers()
        .into_iter()
        .map(|(q, v)| json!({"question_id": q, "value": v}))
        .collect();
    let after = w
        .send(Method::POST, &format!("{base}/answers"), body(json!({"answers": answers})))
        .await;
    assert_eq!(after.json()["questions"], json!([]));
    for r in passport_risks() {
        let uri = format!("{base}/risks/{}", r.id);
        w.send(Method::PUT, &uri, body(serde_json::to_value(&r).unwrap())).await;
    }
    w.send(Method::POST, &format!("{base}/stages/3/complete"), None).await;
    let derived = w.send(Method::POST, &format!("{base}/impacts/derive"), None).await.json();
    let ids: Vec<String> = derived["impacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["id"].as_str().unwrap().to_string())
        .collect();
    assert!(!ids.is_empty());
    for iid in &ids {
        let enc = iid.replace('/', "%2F");
        w.send(Method::POST, &format!("{base}/impacts/{enc}/remedies/0/adopt"), None).await;
        let status = body(json!({"status": "Resolved"}));
        w.send(Method::PUT, &format!("{base}/impacts/{enc}/status"), status).await;
    }
    w.send(Method::POST, &format!("{base}/stages/4/complete"), None).await;
    let report = w.send(Method::POST, &format!("{base}/report"), None).await;
    (w.rev, report.bytes)
}

#[tokio::test]
async fn passport_example_end_to_end_over_http() {
    let app = app();
    let (_, report) = passport_over_http(&app, "pc").await;
    let compiled = read_report_document(&report).unwrap();
    assert!(compiled
        .report
        .impacts
        .iter()
        .any(|i| i.right.charter_article == 21));
    let again = call(&app, Method::GET, "/api/v1/assessments/pc/report", None, None).await;
    assert_eq!(again.bytes, report);

    let n = call(
        &app,
        Method::POST,
        "/api/v1/assessments/pc/notification",
        None,
        body(json!({
            "mode": "MarketSurveillanceNotification",
            "authority": "IE market surveillance authority",
            "submitter": {"id": "border-agency", "name": "National border agency", "roles": ["Deployer"]}
        })),
    )
    .await;
    assert_eq!(n.status, StatusCode::OK, "{}", String::from_utf8_lossy(&n.bytes));
    let payload: NotificationPayload = serde_json::from_slice(&n.bytes).unwrap();
    assert!(payload.dry_run);
    verify_notification(&payload, &report).unwrap();

    let stages = call(&app, Method::GET, "/api/v1/assessments/pc/stages", None, None).await.json();
    assert!(stages["stages"].as_array().unwrap().iter().all(|s| s["state"] == "Complete"));
}

#[tokio::test]
async fn restart_keeps_every_answer() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(FsStore::open(dir.path()).unwrap());
    let app = router(AppState::new(store.clone()));
    let (rev, _) = passport_over_http(&app, "pc").await;
    let before = store.latest("pc").unwrap();
    drop(app);

    let reopened = router(AppState::new(Arc::new(FsStore::open(dir.path()).unwrap())));
    let got = call(&reopened, Method::GET, "/api/v1/assessments/pc", None, None).await;
    assert_eq!(got.etag, Some(rev));
    assert_eq!(got.bytes, before.1);
    let first = call(&reopened, Method::GET, "/api/v1/assessments/pc/revisions/1", None, None).await;
    assert_eq!(first.status, StatusCode::OK);
}

