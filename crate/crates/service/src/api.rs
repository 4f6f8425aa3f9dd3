//! HTTP routes. Every route except `/health`, `/auth/register` and
//! `/auth/login` requires `Authorization: Bearer <token>`.

use std::sync::Arc;

use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use clinic_core::accounts::{NewAccount, Profile, UserAccount};
use clinic_core::care_cycle::{Stage, StagePayload};
use clinic_core::eho::{Role, SubModule};
use clinic_core::medical::{RequestKind, RequestOutcome, RequestState};
use clinic_core::personal::{DiaryEntry, HealthPlan, LineItem};
use clinic_core::social::{ConnectionVerb, MessageKind, PostKind};
use clinic_core::store::StoreError;
use clinic_core::{Actor, Clinic, ClinicError, Id};

pub type Shared = Arc<Clinic>;

#[derive(Debug)]
pub enum ApiError {
    Clinic(ClinicError),
    Unauthorized,
    BadRequest(String),
}

impl From<ClinicError> for ApiError {
    fn from(e: ClinicError) -> Self {
        ApiError::Clinic(e)
    }
}

pub fn status_of(e: &ClinicError) -> StatusCode {
    use ClinicError::*;
    match e {
        PermissionDenied(_) | NotOwner(_) | NotVisible => StatusCode::FORBIDDEN,
        NotFound(..) | UnknownPatient(_) | UnknownGrant(_) | UnknownRecipient(_) => StatusCode::NOT_FOUND,
        IllegalTransition(_) | AlreadyRevoked(_) | ImmutableEntry(_) | LoginTaken(_) => StatusCode::CONFLICT,
        Store(StoreError::VersionConflict { .. }) => StatusCode::CONFLICT,
        BadCredentials | UnknownToken => StatusCode::UNAUTHORIZED,
        NotSupported(_) => StatusCode::NOT_IMPLEMENTED,
        Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ApiError::Clinic(e) => (status_of(&e), e.code(), e.to_string()),
            ApiError::Unauthorized => (StatusCode::UNAUTHORIZED, "Unauthorized", "missing or invalid session".into()),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "BadRequest", m),
        };
        if status.is_server_error() {
            tracing::error!(%code, %message, "request failed");
        }
        (status, Json(json!({ "error": code, "message": message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// The authenticated caller.
pub struct Auth {
    pub actor: Actor,
    pub token: String,
}

impl FromRequestParts<Shared> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, clinic: &Shared) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .ok_or(ApiError::Unauthorized)?
            .to_owned();
        let actor = clinic.session_actor(&token).map_err(|e| match e {
            ClinicError::UnknownToken | ClinicError::NotFound(..) => ApiError::Unauthorized,
            other => ApiError::Clinic(other),
        })?;
        Ok(Auth { actor, token })
    }
}

/// Account as returned by the API (credential omitted).
#[derive(Serialize)]
pub struct AccountView {
    pub id: Id,
    pub login: String,
    pub role: Role,
    pub delegate_of: Option<Id>,
    pub profile: Profile,
    pub created_at: DateTime<Utc>,
}

impl From<UserAccount> for AccountView {
    fn from(a: UserAccount) -> Self {
        AccountView { id: a.id, login: a.login, role: a.role, delegate_of: a.delegate_of, profile: a.profile, created_at: a.created_at }
    }
}

pub fn router(clinic: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/auth/register", post(register))
        .route("/auth/login", post(login))
        .route("/auth/logout", post(logout))
        .route("/me", get(me))
        .route("/me/profile", axum::routing::put(update_profile))
        .route("/accounts", post(create_account))
        .route("/users", get(find_users))
        .route("/online", get(online))
        .route("/patients/{id}/entries", post(record_entry))
        .route("/patients/{id}/timeline", get(timeline))
        .route("/patients/{id}/plan", get(get_plan).put(put_plan))
        .route("/patients/{id}/plan/revisions", get(plan_revisions))
        .route("/plan-revisions/{id}/review", post(review_plan))
        .route("/patients/{id}/account", get(view_account))
        .route("/patients/{id}/account/items", post(add_line_item))
        .route("/patients/{id}/account/pay", post(pay))
        .route("/patients/{id}/emr", get(read_emr).post(record_emr))
        .route("/patients/{id}/emr/export", get(export_emr))
        .route("/patients/{id}/consultations", post(record_consultation))
        .route("/patients/{id}/grants", get(list_grants).post(grant))
        .route("/patients/{id}/episodes", get(list_episodes))
        .route("/emr/{id}", axum::routing::put(update_emr))
        .route("/grants/{id}/revoke", post(revoke))
        .route("/requests", get(list_requests).post(submit_request))
        .route("/requests/{id}", get(get_request))
        .route("/requests/{id}/decision", post(decide_request))
        .route("/connections", get(list_connections).post(manage_connection))
        .route("/posts", post(create_post))
        .route("/posts/{id}", get(get_post))
        .route("/posts/{id}/like", post(like))
        .route("/feed", get(feed))
        .route("/events", post(create_event))
        .route("/groups", get(list_groups).post(create_group))
        .route("/groups/{id}/join", post(join_group))
        .route("/groups/{id}/leave", post(leave_group))
        .route("/motd", get(get_motd).post(set_motd))
        .route("/messages", get(inbox).post(send_message))
        .route("/messages/with/{other}", get(thread))
        .route("/suggestions", get(suggestions))
        .route("/search", get(search))
        .route("/episodes", post(open_episode))
        .route("/episodes/{id}", get(get_episode))
        .route("/episodes/{id}/advance", post(advance_episode))
        .route("/episodes/{id}/report", get(episode_report))
        .route("/notifications", get(notifications))
        .route("/notifications/read", post(mark_read))
        .route("/audit", get(audit))
        .with_state(clinic)
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct RegisterBody {
    login: String,
    password: String,
    #[serde(default)]
    display_name: String,
}

async fn register(State(c): State<Shared>, Json(b): Json<RegisterBody>) -> Result<(StatusCode, Json<AccountView>), ApiError> {
    let account = c.register(&b.login, &b.password, &b.display_name)?;
    Ok((StatusCode::CREATED, Json(account.into())))
}

#[derive(Deserialize)]
struct LoginBody {
    login: String,
    password: String,
}

async fn login(State(c): State<Shared>, Json(b): Json<LoginBody>) -> ApiResult<Value> {
    let session = c.authenticate(&b.login, &b.password)?;
    let account = c.account(&session.principal)?;
    Ok(Json(json!({ "token": session.token, "principal": session.principal, "role": account.role })))
}

async fn logout(State(c): State<Shared>, auth: Auth) -> Result<StatusCode, ApiError> {
    c.logout(&auth.token)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn me(State(c): State<Shared>, auth: Auth) -> ApiResult<AccountView> {
    Ok(Json(c.account(&auth.actor.id)?.into()))
}

async fn update_profile(State(c): State<Shared>, auth: Auth, Json(p): Json<Profile>) -> ApiResult<AccountView> {
    Ok(Json(c.update_profile(&auth.actor, p)?.into()))
}

async fn create_account(State(c): State<Shared>, auth: Auth, Json(b): Json<NewAccount>) -> Result<(StatusCode, Json<AccountView>), ApiError> {
    Ok((StatusCode::CREATED, Json(c.create_account(&auth.actor, b)?.into())))
}

#[derive(Deserialize)]
struct SearchQuery {
    #[serde(default)]
    q: String,
}

async fn find_users(State(c): State<Shared>, _auth: Auth, Query(q): Query<SearchQuery>) -> ApiResult<Value> {
    Ok(Json(json!(c.find_users(&q.q)?)))
}

async fn online(State(c): State<Shared>, auth: Auth) -> ApiResult<Vec<Id>> {
    Ok(Json(c.online_friends(&auth.actor)?))
}

async fn record_entry(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(e): Json<DiaryEntry>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let obj = c.record_entry(&auth.actor, &Id(id), &e)?;
    Ok((StatusCode::CREATED, Json(json!(obj))))
}

#[derive(Deserialize)]
struct Range {
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
}

async fn timeline(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Query(r): Query<Range>) -> ApiResult<Value> {
    let from = r.from.unwrap_or(DateTime::<Utc>::MIN_UTC);
    let to = r.to.unwrap_or(DateTime::<Utc>::MAX_UTC);
    Ok(Json(json!(c.view_timeline(&auth.actor, &Id(id), from, to)?)))
}

async fn get_plan(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.health_plan(&auth.actor, &Id(id))?)))
}

#[derive(Deserialize)]
struct PlanBody {
    plan: HealthPlan,
    expected_version: Option<u64>,
}

async fn put_plan(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(b): Json<PlanBody>) -> ApiResult<Value> {
    Ok(Json(json!(c.upsert_health_plan(&auth.actor, &Id(id), &b.plan, b.expected_version)?)))
}

async fn plan_revisions(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.pending_plan_revisions(&auth.actor, &Id(id))?)))
}

#[derive(Deserialize)]
struct ReviewBody {
    accept: bool,
}

async fn review_plan(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(b): Json<ReviewBody>) -> ApiResult<Value> {
    Ok(Json(json!(c.review_plan_revision(&auth.actor, &Id(id), b.accept)?)))
}

async fn view_account(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.view_account(&auth.actor, &Id(id))?)))
}

async fn add_line_item(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(item): Json<LineItem>) -> ApiResult<Value> {
    Ok(Json(json!(c.add_line_item(&auth.actor, &Id(id), item)?)))
}

async fn pay(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    c.pay_online(&auth.actor, &Id(id))?;
    Ok(StatusCode::NO_CONTENT)
}

fn parse_kinds(kinds: Option<&str>) -> Result<Vec<SubModule>, ApiError> {
    kinds
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<SubModule>().map_err(|e| ApiError::BadRequest(e.to_string())))
        .collect()
}

#[derive(Deserialize)]
struct KindsQuery {
    kinds: Option<String>,
}

async fn read_emr(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Query(q): Query<KindsQuery>) -> ApiResult<Value> {
    let kinds = parse_kinds(q.kinds.as_deref())?;
    Ok(Json(json!(c.read_emr(&auth.actor, &Id(id), &kinds)?)))
}

#[derive(Deserialize)]
struct EmrBody {
    kind: SubModule,
    payload: Value,
}

async fn record_emr(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(b): Json<EmrBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let obj = c.record_emr(&auth.actor, &Id(id), b.kind, b.payload)?;
    Ok((StatusCode::CREATED, Json(json!(obj))))
}

async fn update_emr(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(payload): Json<Value>) -> ApiResult<Value> {
    Ok(Json(json!(c.update_emr(&auth.actor, &Id(id), payload)?)))
}

async fn export_emr(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> Result<Response, ApiError> {
    let body = c.export_emr(&auth.actor, &Id(id))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

#[derive(Deserialize)]
struct ConsultationBody {
    note: String,
    #[serde(default)]
    diagnosis: Vec<String>,
    thread: Option<Id>,
}

async fn record_consultation(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(b): Json<ConsultationBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let obj = c.record_consultation(&auth.actor, &Id(id), &b.note, &b.diagnosis, b.thread.as_ref())?;
    Ok((StatusCode::CREATED, Json(json!(obj))))
}

async fn list_grants(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.list_grants(&auth.actor, &Id(id))?)))
}

#[derive(Deserialize)]
struct GrantBody {
    grantee: Id,
    scope: Vec<SubModule>,
}

async fn grant(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(b): Json<GrantBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    if auth.actor.id.0 != id {
        return Err(ClinicError::PermissionDenied("grant.patient-only".into()).into());
    }
    Ok((StatusCode::CREATED, Json(json!(c.grant_access(&auth.actor, &b.grantee, &b.scope)?))))
}

async fn revoke(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.revoke_access(&auth.actor, &Id(id))?)))
}

#[derive(Deserialize)]
struct RequestBody {
    patient: Option<Id>,
    kind: RequestKind,
    detail: String,
    #[serde(default)]
    reason: String,
}

async fn submit_request(State(c): State<Shared>, auth: Auth, Json(b): Json<RequestBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let patient = b.patient.unwrap_or_else(|| auth.actor.id.clone());
    let r = c.submit_request(&auth.actor, &patient, b.kind, &b.detail, &b.reason)?;
    Ok((StatusCode::CREATED, Json(json!(r))))
}

#[derive(Deserialize)]
struct StateQuery {
    state: Option<RequestState>,
}

async fn list_requests(State(c): State<Shared>, auth: Auth, Query(q): Query<StateQuery>) -> ApiResult<Value> {
    Ok(Json(json!(c.list_requests(&auth.actor, q.state)?)))
}

async fn get_request(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    let (version, r) = c.get_request(&auth.actor, &Id(id))?;
    Ok(Json(json!({ "version": version, "request": r })))
}

#[derive(Deserialize)]
struct DecisionBody {
    #[serde(flatten)]
    outcome: RequestOutcome,
    expected_version: Option<u64>,
}

async fn decide_request(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(b): Json<DecisionBody>) -> ApiResult<Value> {
    Ok(Json(json!(c.decide_request(&auth.actor, &Id(id), b.outcome, b.expected_version)?)))
}

async fn list_connections(State(c): State<Shared>, auth: Auth) -> ApiResult<Value> {
    Ok(Json(json!(c.connections_of(&auth.actor.id)?)))
}

#[derive(Deserialize)]
struct ConnectionBody {
    target: Id,
    verb: ConnectionVerb,
}

async fn manage_connection(State(c): State<Shared>, auth: Auth, Json(b): Json<ConnectionBody>) -> ApiResult<Value> {
    Ok(Json(json!(c.manage_connection(&auth.actor, &b.target, b.verb)?)))
}

#[derive(Deserialize)]
struct PostBody {
    kind: PostKind,
    body: String,
    parent: Option<Id>,
    group: Option<Id>,
}

async fn create_post(State(c): State<Shared>, auth: Auth, Json(b): Json<PostBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let p = c.post(&auth.actor, b.kind, &b.body, b.parent.as_ref(), b.group.as_ref())?;
    Ok((StatusCode::CREATED, Json(json!(p))))
}

async fn get_post(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.get_post(&auth.actor, &Id(id))?)))
}

async fn like(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!({ "likes": c.react(&auth.actor, &Id(id))? })))
}

#[derive(Deserialize)]
struct LimitQuery {
    limit: Option<usize>,
}

async fn feed(State(c): State<Shared>, auth: Auth, Query(q): Query<LimitQuery>) -> ApiResult<Value> {
    Ok(Json(json!(c.build_feed(&auth.actor, q.limit.unwrap_or(50))?)))
}

#[derive(Deserialize)]
struct EventBody {
    title: String,
    starts_at: DateTime<Utc>,
    group: Option<Id>,
}

async fn create_event(State(c): State<Shared>, auth: Auth, Json(b): Json<EventBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    Ok((StatusCode::CREATED, Json(json!(c.create_event(&auth.actor, &b.title, b.starts_at, b.group.as_ref())?))))
}

async fn list_groups(State(c): State<Shared>, _auth: Auth) -> ApiResult<Value> {
    Ok(Json(json!(c.groups()?)))
}

#[derive(Deserialize)]
struct GroupBody {
    name: String,
}

async fn create_group(State(c): State<Shared>, auth: Auth, Json(b): Json<GroupBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    Ok((StatusCode::CREATED, Json(json!(c.create_group(&auth.actor, &b.name)?))))
}

async fn join_group(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.join_group(&auth.actor, &Id(id))?)))
}

async fn leave_group(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.leave_group(&auth.actor, &Id(id))?)))
}

async fn get_motd(State(c): State<Shared>, auth: Auth) -> ApiResult<Value> {
    Ok(Json(json!(c.get_motd(&auth.actor)?)))
}

#[derive(Deserialize)]
struct MotdBody {
    user: Id,
    message: String,
    effective_at: Option<DateTime<Utc>>,
}

async fn set_motd(State(c): State<Shared>, auth: Auth, Json(b): Json<MotdBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let at = b.effective_at.unwrap_or_else(|| c.now());
    Ok((StatusCode::CREATED, Json(json!(c.set_motd(&auth.actor, &b.user, &b.message, at)?))))
}

#[derive(Deserialize)]
struct MessageBody {
    to: Id,
    body: String,
    #[serde(default = "direct")]
    kind: MessageKind,
}

fn direct() -> MessageKind {
    MessageKind::Direct
}

async fn send_message(State(c): State<Shared>, auth: Auth, Json(b): Json<MessageBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    Ok((StatusCode::CREATED, Json(json!(c.send_message(&auth.actor, &b.to, &b.body, b.kind)?))))
}

async fn inbox(State(c): State<Shared>, auth: Auth) -> ApiResult<Value> {
    Ok(Json(json!(c.list_inbox(&auth.actor)?)))
}

async fn thread(State(c): State<Shared>, auth: Auth, Path(other): Path<String>) -> ApiResult<Value> {
    let me = auth.actor.id.clone();
    Ok(Json(json!(c.thread(&auth.actor, &me, &Id(other))?)))
}

#[derive(Deserialize)]
struct KQuery {
    k: Option<usize>,
}

async fn suggestions(State(c): State<Shared>, auth: Auth, Query(q): Query<KQuery>) -> ApiResult<Value> {
    Ok(Json(json!(c.suggest_friends(&auth.actor, q.k.unwrap_or(10))?)))
}

async fn search(State(c): State<Shared>, auth: Auth, Query(q): Query<SearchQuery>) -> ApiResult<Value> {
    Ok(Json(json!(c.search(&auth.actor, &q.q)?)))
}

#[derive(Deserialize)]
struct EpisodeBody {
    patient: Option<Id>,
    problem_statement: String,
    parent_episode: Option<Id>,
}

async fn open_episode(State(c): State<Shared>, auth: Auth, Json(b): Json<EpisodeBody>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let patient = b.patient.unwrap_or_else(|| auth.actor.id.clone());
    let ep = c.open_episode(&auth.actor, &patient, &b.problem_statement, b.parent_episode.as_ref())?;
    Ok((StatusCode::CREATED, Json(json!(ep))))
}

async fn get_episode(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    let (version, ep) = c.episode(&auth.actor, &Id(id))?;
    Ok(Json(json!({ "version": version, "episode": ep })))
}

async fn list_episodes(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.list_episodes(&auth.actor, &Id(id))?)))
}

#[derive(Deserialize)]
struct AdvanceBody {
    to: String,
    payload: StagePayload,
    expected_version: Option<u64>,
}

async fn advance_episode(State(c): State<Shared>, auth: Auth, Path(id): Path<String>, Json(b): Json<AdvanceBody>) -> ApiResult<Value> {
    let to: Stage = b.to.parse().map_err(ApiError::BadRequest)?;
    Ok(Json(json!(c.advance(&auth.actor, &Id(id), to, b.payload, b.expected_version)?)))
}

async fn episode_report(State(c): State<Shared>, auth: Auth, Path(id): Path<String>) -> ApiResult<Value> {
    Ok(Json(json!(c.episode_report(&auth.actor, &Id(id))?)))
}

#[derive(Deserialize)]
struct UnreadQuery {
    #[serde(default)]
    unread_only: bool,
}

async fn notifications(State(c): State<Shared>, auth: Auth, Query(q): Query<UnreadQuery>) -> ApiResult<Value> {
    Ok(Json(json!(c.list_notifications(&auth.actor, q.unread_only)?)))
}

#[derive(Deserialize)]
struct IdsBody {
    ids: Vec<Id>,
}

async fn mark_read(State(c): State<Shared>, auth: Auth, Json(b): Json<IdsBody>) -> Result<StatusCode, ApiError> {
    c.mark_read(&auth.actor, &b.ids)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn audit(State(c): State<Shared>, auth: Auth) -> ApiResult<Value> {
    if auth.actor.role != Role::Admin {
        return Err(ClinicError::PermissionDenied("audit.admin-only".into()).into());
    }
    Ok(Json(json!(c.audit_log()?)))
}

/// Parse a `YYYY-MM-DD` date, treating an empty string as absent.
pub fn optional_date(s: &str) -> Result<Option<NaiveDate>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map(Some).map_err(|e| format!("bad date `{s}`: {e}"))
}
