use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use chrono::Utc;
use fria_core::bridge;
use fria_core::canonical::to_canonical_bytes;
use fria_core::catalog::{CatalogFile, CatalogSet, SharedCatalogs};
use fria_core::intake::next_questions;
use fria_core::model::{Assessment, ChangeContext, EntityRef, Jurisdiction, Ordinal, Purpose, SystemProfile};
use fria_core::reporting::{
    build_notification, export_assessment, import_assessment, read_report_document, NotificationMode,
};
use fria_core::rights_impact::{ImpactStatus, RemedialMeasure};
use fria_core::risk::{apply_mitigations, MitigationRef, RiskError, RiskItem};
use fria_core::workflow::{self, stage_summary};
use fria_core::WorkflowError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::sessions::{SessionError, Sessions};
use crate::store::DocumentStore;

pub const SESSION_HEADER: &str = "x-session-id";
pub const ACTOR_HEADER: &str = "x-actor";
const REPORT_ARTIFACT: &str = "report";

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<dyn DocumentStore>,
    pub catalogs: SharedCatalogs,
    pub sessions: Arc<Sessions>,
    /// When set, every request needs `Authorization: Bearer <token>`.
    pub token: Option<Arc<str>>,
}

impl AppState {
    pub fn new(store: Arc<dyn DocumentStore>) -> Self {
        Self {
            store,
            catalogs: SharedCatalogs::default(),
            sessions: Arc::new(Sessions::new()),
            token: None,
        }
    }

    pub fn with_catalogs(mut self, catalogs: SharedCatalogs) -> Self {
        self.catalogs = catalogs;
        self
    }

    pub fn with_token(mut self, token: impl Into<Arc<str>>) -> Self {
        self.token = Some(token.into());
        self
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/catalogs", get(catalog_versions))
        .route("/catalogs/{name}", get(catalog))
        .route("/score", post(score))
        .route("/assessments", get(list_assessments).post(create_assessment))
        .route("/assessments/{id}", get(get_assessment))
        .route("/assessments/{id}/revisions/{rev}", get(get_revision))
        .route("/assessments/{id}/stages", get(stages))
        .route("/assessments/{id}/sessions", post(open_session))
        .route("/sessions/{sid}", get(get_session).delete(close_session))
        .route("/assessments/{id}/profile", get(get_profile).put(put_profile))
        .route("/assessments/{id}/dpia", post(upload_dpia))
        .route("/assessments/{id}/dpia/skip", post(skip_dpia))
        .route("/assessments/{id}/gaps", get(gaps))
        .route("/assessments/{id}/questions", get(questions))
        .route("/assessments/{id}/answers", post(answers))
        .route("/assessments/{id}/compatibility", post(compatibility))
        .route("/assessments/{id}/risks", get(list_risks))
        .route("/assessments/{id}/risks/suggest", post(suggest_risks))
        .route("/assessments/{id}/risks/{rid}", put(put_risk).delete(delete_risk))
        .route("/assessments/{id}/risks/{rid}/score", post(score_risk))
        .route("/assessments/{id}/risks/{rid}/mitigations", put(set_mitigations))
        .route("/assessments/{id}/stages/3/complete", post(complete_stage3))
        .route("/assessments/{id}/impacts", get(list_impacts))
        .route("/assessments/{id}/impacts/derive", post(derive_impacts))
        .route("/assessments/{id}/impacts/{iid}/status", put(impact_status))
        .route("/assessments/{id}/impacts/{iid}/remedies", post(add_remedy))
        .route("/assessments/{id}/impacts/{iid}/remedies/{idx}/adopt", post(adopt_remedy))
        .route("/assessments/{id}/stages/4/complete", post(complete_stage4))
        .route("/assessments/{id}/report", get(get_report).post(issue_report))
        .route("/assessments/{id}/notification", post(notification))
        .layer(middleware::from_fn_with_state(state.clone(), authorize))
        .with_state(state);
    Router::new()
        .nest("/api/v1", api)
        .fallback(|| async { ApiError::not_found("no such resource") })
}

async fn authorize(State(s): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &s.token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == &**token);
        if !ok {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "a valid bearer token is required")
                .into_response();
        }
    }
    next.run(req).await
}

fn respond<T: Serialize + ?Sized>(status: StatusCode, rev: Option<u64>, body: &T) -> Response {
    match to_canonical_bytes(body) {
        Ok(bytes) => raw(status, rev, bytes),
        Err(e) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()).into_response(),
    }
}

fn raw(status: StatusCode, rev: Option<u64>, bytes: Vec<u8>) -> Response {
    let mut res = (status, bytes).into_response();
    let h = res.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    if let Some(rev) = rev {
        h.insert(header::ETAG, HeaderValue::from_str(&format!("\"{rev}\"")).expect("digits are valid"));
    }
    res
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", e.to_string())
        }
        _ => ApiError::bad_request(format!("malformed JSON: {e}")),
    })
}

/// The revision the client last saw, from `If-Match`.
fn if_match(headers: &HeaderMap) -> Result<u64, ApiError> {
    let v = headers.get(header::IF_MATCH).ok_or_else(|| {
        ApiError::new(
            StatusCode::PRECONDITION_REQUIRED,
            "revision_required",
            "mutations need an If-Match header with the current revision",
        )
    })?;
    v.to_str()
        .ok()
        .map(|s| s.trim().trim_start_matches("W/").trim_matches('"'))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ApiError::bad_request("If-Match must hold a revision number"))
}

fn session_error(e: SessionError) -> ApiError {
    match e {
        SessionError::Held(s) => ApiError::new(
            StatusCode::CONFLICT,
            "locked",
            format!("assessment is being edited by '{}'", s.owner),
        )
        .with_details(vec![json!({ "owner": s.owner, "session_id": s.session_id })]),
        SessionError::Unknown(id) => ApiError::not_found(format!("session '{id}'")),
        SessionError::WrongAssessment { session, assessment } => {
            ApiError::bad_request(format!("session '{session}' does not belong to assessment '{assessment}'"))
        }
    }
}

fn header_str<'a>(headers: &'a HeaderMap, name: &str) -> Option<&'a str> {
    headers.get(name).and_then(|v| v.to_str().ok())
}

fn load(s: &AppState, id: &str) -> Result<(u64, Assessment), ApiError> {
    let (rev, bytes) = s.store.latest(id)?;
    Ok((rev, import_assessment(&bytes)?))
}

/// Read-modify-write of one assessment. The write only lands if nobody
/// else wrote since the revision named in `If-Match`.
fn mutate<T: Serialize>(
    s: &AppState,
    id: &str,
    headers: &HeaderMap,
    f: impl FnOnce(&Assessment, &CatalogSet, &ChangeContext) -> Result<(Assessment, T), ApiError>,
) -> Result<Response, ApiError> {
    let expected = if_match(headers)?;
    let actor = s
        .sessions
        .writer(id, header_str(headers, SESSION_HEADER), header_str(headers, ACTOR_HEADER).unwrap_or("api"))
        .map_err(session_error)?;
    let (rev, a) = load(s, id)?;
    if rev != expected {
        return Err(ApiError::conflict(expected, rev));
    }
    let ctx = ChangeContext::new(actor, Utc::now().max(a.updated_at));
    let cats = s.catalogs.current();
    let (next, out) = f(&a, &cats, &ctx)?;
    let new_rev = s.store.append(id, rev, &export_assessment(&next))?;
    tracing::debug!(assessment = id, revision = new_rev, "assessment updated");
    Ok(respond(StatusCode::OK, Some(new_rev), &out))
}

fn with_stages(a: &Assessment, extra: Value) -> Value {
    let mut v = extra;
    v["stages"] = serde_json::to_value(stage_summary(a)).unwrap_or(Value::Null);
    v
}

async fn catalog_versions(State(s): State<AppState>) -> Response {
    let cats = s.catalogs.current();
    respond(
        StatusCode::OK,
        None,
        &json!({ "versions": cats.versions(), "checksums": cats.checksums() }),
    )
}

async fn catalog(State(s): State<AppState>, Path(name): Path<String>) -> Result<Response, ApiError> {
    let file: CatalogFile = name.parse().map_err(|_| ApiError::not_found(format!("catalog '{name}'")))?;
    let c = s.catalogs.current();
    let v = match file {
        CatalogFile::Conditions => serde_json::to_value(&c.conditions),
        CatalogFile::Mapping => serde_json::to_value(&c.mapping),
        CatalogFile::Rights => serde_json::to_value(&c.rights),
        CatalogFile::Risks => serde_json::to_value(&c.taxonomies.risks),
        CatalogFile::RiskSources => serde_json::to_value(&c.taxonomies.sources),
        CatalogFile::Consequences => serde_json::to_value(&c.taxonomies.consequences),
        CatalogFile::Mitigations => serde_json::to_value(&c.taxonomies.mitigations),
        CatalogFile::Questionnaire => serde_json::to_value(&c.questionnaire),
        CatalogFile::RiskMatrix => serde_json::to_value(&c.matrix),
        CatalogFile::Acceptability => serde_json::to_value(&c.acceptability),
        CatalogFile::ImpactRules => serde_json::to_value(&c.impact_rules),
    }
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    Ok(respond(StatusCode::OK, None, &v))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreRequest {
    likelihood: i64,
    severity: i64,
    #[serde(default)]
    mitigations: Vec<MitigationRef>,
}

/// Stateless what-if scoring against the current matrix.
async fn score(State(s): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: ScoreRequest = parse(&body)?;
    let cats = s.catalogs.current();
    let out_of_range = |field: &'static str, value: i64| WorkflowError::from(RiskError::OutOfRange { field, value });
    let l = Ordinal::new(req.likelihood).map_err(|_| out_of_range("likelihood", req.likelihood))?;
    let sv = Ordinal::new(req.severity).map_err(|_| out_of_range("severity", req.severity))?;
    let mut r = RiskItem::draft("what-if", "", &[], "");
    r.likelihood = Some(l);
    r.severity = Some(sv);
    r.mitigations = req.mitigations;
    let initial = cats.matrix.level(l, sv).map_err(WorkflowError::from)?;
    let scored = apply_mitigations(&r, &cats.matrix).map_err(WorkflowError::from)?;
    Ok(respond(
        StatusCode::OK,
        None,
        &json!({ "initial": initial, "residual": scored.residual, "matrix_version": cats.matrix.version }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    #[serde(default)]
    id: Option<String>,
    jurisdiction: String,
}

async fn create_assessment(State(s): State<AppState>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse(&body)?;
    let j: Jurisdiction = req.jurisdiction.parse().map_err(|e: fria_core::model::UnknownJurisdiction| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", e.to_string())
    })?;
    let id = req.id.unwrap_or_else(|| uuid::Uuid::new_v4().simple().to_string());
    let actor = header_str(&headers, ACTOR_HEADER).unwrap_or("api");
    let a = Assessment::new(id.clone(), j, &ChangeContext::new(actor, Utc::now()));
    let rev = s.store.create(&id, &export_assessment(&a))?;
    let mut res = respond(
        StatusCode::CREATED,
        Some(rev),
        &with_stages(&a, json!({ "id": id, "revision": rev })),
    );
    if let Ok(loc) = HeaderValue::from_str(&format!("/api/v1/assessments/{id}")) {
        res.headers_mut().insert(header::LOCATION, loc);
    }
    Ok(res)
}

async fn list_assessments(State(s): State<AppState>) -> Result<Response, ApiError> {
    let items: Vec<Value> = s
        .store
        .list()?
        .into_iter()
        .map(|(id, rev)| json!({ "id": id, "revision": rev }))
        .collect();
    Ok(respond(StatusCode::OK, None, &json!({ "assessments": items })))
}

async fn get_assessment(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (rev, bytes) = s.store.latest(&id)?;
    Ok(raw(StatusCode::OK, Some(rev), bytes))
}

async fn get_revision(State(s): State<AppState>, Path((id, rev)): Path<(String, u64)>) -> Result<Response, ApiError> {
    let bytes = s.store.revision(&id, rev)?;
    Ok(raw(StatusCode::OK, Some(rev), bytes))
}

async fn stages(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (rev, a) = load(&s, &id)?;
    Ok(respond(StatusCode::OK, Some(rev), &with_stages(&a, json!({}))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenSession {
    owner: String,
}

async fn open_session(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let req: OpenSession = parse(&body)?;
    if req.owner.trim().is_empty() {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", "owner is empty"));
    }
    let (rev, _) = s.store.latest(&id)?;
    let session = s.sessions.open(&id, &req.owner, Utc::now()).map_err(session_error)?;
    Ok(respond(StatusCode::CREATED, Some(rev), &session))
}

async fn get_session(State(s): State<AppState>, Path(sid): Path<String>) -> Result<Response, ApiError> {
    let session = s
        .sessions
        .get(&sid)
        .ok_or_else(|| ApiError::not_found(format!("session '{sid}'")))?;
    let (rev, _) = s.store.latest(&session.assessment_id)?;
    let mut v = serde_json::to_value(&session).unwrap_or(Value::Null);
    v["revision"] = json!(rev);
    Ok(respond(StatusCode::OK, Some(rev), &v))
}

async fn close_session(State(s): State<AppState>, Path(sid): Path<String>) -> Result<Response, ApiError> {
    s.sessions
        .close(&sid)
        .ok_or_else(|| ApiError::not_found(format!("session '{sid}'")))?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

async fn get_profile(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (rev, a) = load(&s, &id)?;
    Ok(respond(
        StatusCode::OK,
        Some(rev),
        &json!({ "profile": a.system_profile, "necessity": a.necessity, "dpia_necessity": a.dpia_necessity }),
    ))
}

async fn put_profile(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let profile: SystemProfile = parse(&body)?;
    mutate(&s, &id, &headers, |a, cats, ctx| {
        let next = workflow::submit_profile(a, profile, cats, ctx)?;
        let out = with_stages(
            &next,
            json!({ "necessity": next.necessity, "dpia_necessity": next.dpia_necessity }),
        );
        Ok((next, out))
    })
}

/// Accepts the minimal DPIA import document or a full assessment export.
async fn upload_dpia(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let imported = bridge::import_dpia(&body).map_err(WorkflowError::from)?;
    mutate(&s, &id, &headers, |a, cats, ctx| {
        let (next, prefill) = workflow::import_dpia(a, imported.dpia, cats, ctx)?;
        let gaps = workflow::current_gaps(&next, cats);
        let out = with_stages(
            &next,
            json!({
                "prefill": prefill,
                "gaps": gaps,
                "warnings": imported.report.violations,
                "dpia_necessity": next.dpia_necessity,
            }),
        );
        Ok((next, out))
    })
}

async fn skip_dpia(State(s): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Result<Response, ApiError> {
    mutate(&s, &id, &headers, |a, _, ctx| {
        let next = workflow::skip_dpia(a, ctx)?;
        let out = with_stages(&next, json!({}));
        Ok((next, out))
    })
}

async fn gaps(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (rev, a) = load(&s, &id)?;
    let cats = s.catalogs.current();
    Ok(respond(StatusCode::OK, Some(rev), &workflow::current_gaps(&a, &cats)))
}

fn questions_of(a: &Assessment, cats: &CatalogSet) -> Result<Value, ApiError> {
    let qs = next_questions(a, &cats.questionnaire).map_err(WorkflowError::from)?;
    Ok(json!({ "questionnaire_version": cats.questionnaire.version, "questions": qs }))
}

async fn questions(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (rev, a) = load(&s, &id)?;
    let cats = s.catalogs.current();
    Ok(respond(StatusCode::OK, Some(rev), &questions_of(&a, &cats)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Answer {
    question_id: String,
    value: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerBatch {
    answers: Vec<Answer>,
}

/// Applies answers in order. The batch is all or nothing.
async fn answers(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let batch: AnswerBatch = parse(&body)?;
    let pairs: Vec<(String, Value)> = batch.answers.into_iter().map(|a| (a.question_id, a.value)).collect();
    mutate(&s, &id, &headers, |a, cats, ctx| {
        let next = workflow::submit_answers(a, cats, &pairs, ctx)?;
        let out = with_stages(&next, questions_of(&next, cats)?);
        Ok((next, out))
    })
}

async fn compatibility(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let purpose: Purpose = parse(&body)?;
    mutate(&s, &id, &headers, |a, _, ctx| {
        let next = workflow::check_compatibility(a, &purpose, ctx)?;
        let out = json!({ "compatibility": next.compatibility });
        Ok((next, out))
    })
}

async fn list_risks(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (rev, a) = load(&s, &id)?;
    Ok(respond(StatusCode::OK, Some(rev), &json!({ "risks": a.risks })))
}

fn risks_out(next: Assessment) -> Result<(Assessment, Value), ApiError> {
    let out = json!({ "risks": next.risks, "impacts_stale": next.impacts_stale });
    Ok((next, out))
}

async fn suggest_risks(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    mutate(&s, &id, &headers, |a, cats, ctx| risks_out(workflow::suggest_risks(a, cats, ctx)?))
}

async fn put_risk(
    State(s): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let risk: RiskItem = parse(&body)?;
    if risk.id != rid {
        return Err(ApiError::bad_request(format!("body id '{}' does not match '{rid}'", risk.id)));
    }
    mutate(&s, &id, &headers, |a, cats, ctx| risks_out(workflow::put_risk(a, risk, cats, ctx)?))
}

async fn delete_risk(
    State(s): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    mutate(&s, &id, &headers, |a, _, ctx| risks_out(workflow::remove_risk(a, &rid, ctx)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreRisk {
    likelihood: i64,
    severity: i64,
}

async fn score_risk(
    State(s): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: ScoreRisk = parse(&body)?;
    mutate(&s, &id, &headers, |a, cats, ctx| {
        risks_out(workflow::score_risk(a, &rid, req.likelihood, req.severity, cats, ctx)?)
    })
}

async fn set_mitigations(
    State(s): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let mitigations: Vec<MitigationRef> = parse(&body)?;
    mutate(&s, &id, &headers, |a, cats, ctx| {
        risks_out(workflow::set_mitigations(a, &rid, mitigations, cats, ctx)?)
    })
}

async fn complete_stage3(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    mutate(&s, &id, &headers, |a, cats, ctx| {
        let next = workflow::complete_information_gathering(a, cats, ctx)?;
        let out = with_stages(&next, json!({ "affected_profiles": next.affected_profiles }));
        Ok((next, out))
    })
}

fn impacts_of(a: &Assessment) -> Value {
    json!({ "impacts": a.impacts, "leftovers": a.impact_leftovers, "stale": a.impacts_stale })
}

async fn list_impacts(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (rev, a) = load(&s, &id)?;
    Ok(respond(StatusCode::OK, Some(rev), &impacts_of(&a)))
}

async fn derive_impacts(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    mutate(&s, &id, &headers, |a, cats, ctx| {
        let next = workflow::derive_impacts(a, cats, ctx)?;
        let out = impacts_of(&next);
        Ok((next, out))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusRequest {
    status: ImpactStatus,
}

async fn impact_status(
    State(s): State<AppState>,
    Path((id, iid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: StatusRequest = parse(&body)?;
    mutate(&s, &id, &headers, |a, _, ctx| {
        let next = workflow::set_impact_status(a, &iid, req.status, ctx)?;
        let out = impacts_of(&next);
        Ok((next, out))
    })
}

async fn add_remedy(
    State(s): State<AppState>,
    Path((id, iid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let remedy: RemedialMeasure = parse(&body)?;
    mutate(&s, &id, &headers, |a, _, ctx| {
        let next = workflow::add_remedy(a, &iid, remedy, ctx)?;
        let out = impacts_of(&next);
        Ok((next, out))
    })
}

async fn adopt_remedy(
    State(s): State<AppState>,
    Path((id, iid, idx)): Path<(String, String, usize)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    mutate(&s, &id, &headers, |a, _, ctx| {
        let next = workflow::adopt_remedy(a, &iid, idx, ctx)?;
        let out = impacts_of(&next);
        Ok((next, out))
    })
}

async fn complete_stage4(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    mutate(&s, &id, &headers, |a, _, ctx| {
        let next = workflow::complete_rights_assessment(a, ctx)?;
        let out = with_stages(&next, json!({}));
        Ok((next, out))
    })
}

/// Compiles the report, closes stage 5 and keeps the report bytes.
async fn issue_report(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let mut compiled = None;
    let res = mutate(&s, &id, &headers, |a, cats, ctx| {
        let actor = ctx.actor.clone();
        let report = workflow::compile_report(a, cats, &actor)?;
        let next = workflow::close_with_report(a, &report.checksum, ctx)?;
        let out = json!({ "checksum": report.checksum });
        compiled = Some(report);
        Ok((next, out))
    })?;
    let report = compiled.expect("set when the mutation succeeds");
    s.store.put_artifact(&id, REPORT_ARTIFACT, &report.bytes)?;
    let etag = res.headers().get(header::ETAG).cloned();
    let mut out = raw(StatusCode::CREATED, None, report.bytes);
    if let Some(etag) = etag {
        out.headers_mut().insert(header::ETAG, etag);
    }
    Ok(out)
}

async fn get_report(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(raw(StatusCode::OK, None, s.store.artifact(&id, REPORT_ARTIFACT)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NotificationRequest {
    mode: NotificationMode,
    #[serde(default)]
    authority: Option<String>,
    submitter: EntityRef,
}

/// Builds the dry-run notification for the issued report. Nothing is sent.
async fn notification(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let req: NotificationRequest = parse(&body)?;
    let bytes = s.store.artifact(&id, REPORT_ARTIFACT).map_err(|_| {
        ApiError::new(StatusCode::CONFLICT, "stage_order", "no report has been issued for this assessment")
            .with_details(vec![json!({ "missing_stages": [5] })])
    })?;
    let report = read_report_document(&bytes)?;
    let payload = build_notification(&report, req.authority.as_deref(), req.mode, req.submitter, Utc::now())?;
    Ok(respond(StatusCode::OK, None, &payload))
}
