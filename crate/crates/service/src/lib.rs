//! HTTP front end for editing sessions.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/session` | `{fixture}`, `{manifest}` or `{graph}`, optional `shape` | 201, session summary |
//! | GET | `/session/{id}` | | session summary |
//! | DELETE | `/session/{id}` | | 204 |
//! | GET | `/session/{id}/graph` | | graph file text |
//! | GET | `/session/{id}/topology` | | triangles per graph part |
//! | POST | `/session/{id}/request` | `{text, provider?, votes?, stack?, wait?}` | 202 (or 200 with `wait`) |
//! | POST | `/session/{id}/proxydural` | `{provider?, votes?, wait?}` | 202 (or 200 with `wait`) |
//! | GET | `/session/{id}/job` | | job state |
//! | POST | `/session/{id}/resolve` | `{program_id?, disabled, stack?}` | new program |
//! | POST | `/session/{id}/eval` | `{param: value, ..}` | binary frame |
//! | POST | `/session/{id}/export` | `{param: value, ..}` | OBJ text |
//! | GET, PUT | `/session/{id}/params` | `{param: value, ..}` | parameter state |
//! | POST | `/session/{id}/compose` | `{program_id}` | stack and program |
//! | POST | `/session/{id}/stack` | `{program_ids}` | stack and program |
//! | GET | `/session/{id}/program` | `?id=N` | program text |
//! | POST | `/session/{id}/program` | `{text, stack?}` | 201, program id |
//! | GET | `/session/{id}/report` | `?id=N` | solver report text |
//!
//! Errors are `{"error": ...}` with 404 for unknown sessions or programs,
//! 409 while a job runs, 422 for malformed input and 502 when the language
//! model provider fails. The frame layout is documented in
//! [`shapeprog_core::frame`].

pub mod error;
pub mod session;

use std::collections::HashMap;
use std::path::Path as FsPath;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::{Mutex, RwLock};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use shapeprog_core::aep::propagate;
use shapeprog_core::config::{Config, ProviderKind};
use shapeprog_core::dsl::{evaluate, parse_for, print};
use shapeprog_core::fixtures;
use shapeprog_core::frame;
use shapeprog_core::pipeline::{edit_from_request, proxydural};
use shapeprog_core::shape::io::{graph_from_str, graph_to_string, load_segmented};
use shapeprog_core::shape::mesh::merged_obj;
use shapeprog_core::shape::{build_graph, ShapeGraph};
use shapeprog_core::symbolic::Assignment;

pub use error::ServiceError;
pub use session::{Session, StoredProgram};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum JobState {
    Idle,
    Running { kind: String },
    Done { kind: String, result: Value },
    Failed { kind: String, error: String },
}

pub struct SessionHandle {
    pub session: RwLock<Session>,
    job: Mutex<JobState>,
    failure: Mutex<Option<ServiceError>>,
}

struct Inner {
    config: Config,
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: Config) -> AppState {
        AppState(Arc::new(Inner { config, sessions: RwLock::new(HashMap::new()) }))
    }

    fn handle(&self, id: &str) -> Result<Arc<SessionHandle>, ServiceError> {
        self.0.sessions.read().get(id).cloned().ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }
}

pub fn router(config: Config) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session).delete(delete_session))
        .route("/session/{id}/graph", get(graph_file))
        .route("/session/{id}/topology", get(topology))
        .route("/session/{id}/request", post(request))
        .route("/session/{id}/proxydural", post(proxydural_job))
        .route("/session/{id}/job", get(job))
        .route("/session/{id}/resolve", post(resolve))
        .route("/session/{id}/eval", post(eval))
        .route("/session/{id}/export", post(export))
        .route("/session/{id}/params", get(get_params).put(put_params))
        .route("/session/{id}/compose", post(compose))
        .route("/session/{id}/stack", post(set_stack))
        .route("/session/{id}/program", get(get_program).post(post_program))
        .route("/session/{id}/report", get(report))
        .with_state(AppState::new(config))
}

pub async fn serve(listener: tokio::net::TcpListener, config: Config) -> std::io::Result<()> {
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(config)).await
}

/// JSON body whose rejections are 422 and where an empty body reads as `{}`.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state).await.map_err(|e| ServiceError::Unprocessable(e.to_string()))?;
        let bytes: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) { b"{}" } else { &bytes };
        serde_json::from_slice(bytes).map(JsonBody).map_err(|e| ServiceError::Unprocessable(e.to_string()))
    }
}

type Reply<T> = Result<T, ServiceError>;

#[derive(Deserialize)]
struct CreateBody {
    fixture: Option<String>,
    manifest: Option<String>,
    graph: Option<String>,
    shape: Option<String>,
}

fn load_graph(body: &CreateBody, config: &Config) -> Result<(ShapeGraph, String), ServiceError> {
    let bad = |e: &dyn std::fmt::Display| ServiceError::Unprocessable(e.to_string());
    let (graph, default_shape) = match (&body.fixture, &body.manifest, &body.graph) {
        (Some(name), None, None) => {
            let parts = fixtures::by_name(name).ok_or_else(|| ServiceError::Unprocessable(format!("unknown fixture {name}")))?;
            (build_graph(&parts, config.shape).map_err(|e| bad(&e))?.0, name.clone())
        }
        (None, Some(path), None) => {
            let path = FsPath::new(path);
            let parts = load_segmented(path).map_err(|e| bad(&e))?;
            let stem = path.parent().and_then(|p| p.file_name()).map_or("shape".into(), |s| s.to_string_lossy().into_owned());
            (build_graph(&parts, config.shape).map_err(|e| bad(&e))?.0, stem)
        }
        (None, None, Some(text)) => (graph_from_str(text).map_err(|e| bad(&e))?, "shape".to_string()),
        _ => return Err(ServiceError::Unprocessable("give exactly one of fixture, manifest or graph".into())),
    };
    Ok((graph, body.shape.clone().unwrap_or(default_shape)))
}

async fn create_session(State(app): State<AppState>, JsonBody(body): JsonBody<CreateBody>) -> Reply<impl IntoResponse> {
    let config = app.0.config.clone();
    let (graph, shape) = tokio::task::spawn_blocking(move || load_graph(&body, &config))
        .await
        .map_err(|e| ServiceError::Unprocessable(e.to_string()))??;
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(id.clone(), shape, graph);
    let summary = session.summary();
    let handle = SessionHandle { session: RwLock::new(session), job: Mutex::new(JobState::Idle), failure: Mutex::new(None) };
    app.0.sessions.write().insert(id, Arc::new(handle));
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Reply<Json<Value>> {
    Ok(Json(app.handle(&id)?.session.read().summary()))
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<String>) -> Reply<StatusCode> {
    app.0.sessions.write().remove(&id).ok_or(ServiceError::UnknownSession(id))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn graph_file(State(app): State<AppState>, Path(id): Path<String>) -> Reply<Response> {
    let text = graph_to_string(&app.handle(&id)?.session.read().graph);
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

async fn topology(State(app): State<AppState>, Path(id): Path<String>) -> Reply<Json<Value>> {
    let h = app.handle(&id)?;
    let s = h.session.read();
    let parts: Vec<Value> = s.graph.nodes.iter().map(|n| json!({ "id": n.id, "triangles": n.mesh.triangles })).collect();
    Ok(Json(json!({ "parts": parts })))
}

#[derive(Deserialize)]
struct ProviderOpts {
    provider: Option<ProviderKind>,
    votes: Option<usize>,
}

fn job_config(base: &Config, opts: &ProviderOpts) -> Config {
    let mut c = base.clone();
    if let Some(p) = opts.provider {
        c.llm.provider = p;
    }
    if let Some(v) = opts.votes {
        c.llm.votes = v;
    }
    c
}

/// Mark the session busy and run `work` on the blocking pool. With `wait`
/// the result is the reply; otherwise the reply is 202 and the result goes
/// to the job slot.
async fn start_job<F>(handle: Arc<SessionHandle>, kind: &str, wait: bool, work: F) -> Reply<Response>
where
    F: FnOnce(&SessionHandle) -> Result<Value, ServiceError> + Send + 'static,
{
    {
        let mut job = handle.job.lock();
        if matches!(*job, JobState::Running { .. }) {
            return Err(ServiceError::Busy);
        }
        *job = JobState::Running { kind: kind.to_string() };
    }
    let kind = kind.to_string();
    let h = handle.clone();
    let task = tokio::task::spawn_blocking(move || {
        let result = work(&h);
        *h.job.lock() = match &result {
            Ok(v) => JobState::Done { kind, result: v.clone() },
            Err(e) => JobState::Failed { kind, error: e.to_string() },
        };
        *h.failure.lock() = result.as_ref().err().cloned();
        result
    });
    if !wait {
        return Ok((StatusCode::ACCEPTED, Json(json!({ "state": "running" })),).into_response());
    }
    let result = task.await.map_err(|e| ServiceError::Unprocessable(e.to_string()))??;
    Ok(Json(result).into_response())
}

#[derive(Deserialize)]
struct RequestBody {
    text: String,
    #[serde(flatten)]
    opts: ProviderOpts,
    #[serde(default)]
    stack: bool,
    #[serde(default)]
    wait: bool,
}

async fn request(State(app): State<AppState>, Path(id): Path<String>, JsonBody(body): JsonBody<RequestBody>) -> Reply<Response> {
    if body.text.trim().is_empty() {
        return Err(ServiceError::Unprocessable("empty request text".into()));
    }
    let handle = app.handle(&id)?;
    let config = job_config(&app.0.config, &body.opts);
    start_job(handle, "request", body.wait, move |h| {
        let (graph, shape) = {
            let s = h.session.read();
            (s.graph.clone(), s.shape.clone())
        };
        let provider = config.provider()?;
        let outcome = edit_from_request(&graph, &body.text, provider.as_ref(), &config.infer_options(&shape), &config.aep)?;
        let mut s = h.session.write();
        let pid = s.store_outcome(&body.text, &outcome, outcome.bundle.invalid_relations());
        s.install(pid, body.stack)?;
        Ok(json!({
            "program_id": pid,
            "program": print(outcome.program()),
            "active": print(&s.active),
            "bundle": session::bundle_json(&outcome.bundle),
            "maintained": outcome.propagation.maintained,
            "broken": outcome.propagation.broken,
            "stalled": outcome.propagation.stalled,
        }))
    })
    .await
}

#[derive(Deserialize)]
struct ProxyduralBody {
    #[serde(flatten)]
    opts: ProviderOpts,
    #[serde(default)]
    wait: bool,
}

async fn proxydural_job(
    State(app): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ProxyduralBody>,
) -> Reply<Response> {
    let handle = app.handle(&id)?;
    let config = job_config(&app.0.config, &body.opts);
    start_job(handle, "proxydural", body.wait, move |h| {
        let (graph, shape) = {
            let s = h.session.read();
            (s.graph.clone(), s.shape.clone())
        };
        let provider = config.provider()?;
        let model = proxydural(&graph, provider.as_ref(), &config.infer_options(&shape), &config.aep)?;
        let mut s = h.session.write();
        let ids: Vec<usize> =
            model.outcomes.iter().map(|o| s.store_outcome(&o.bundle.request, o, o.bundle.invalid_relations())).collect();
        s.set_stack(ids.clone())?;
        Ok(json!({
            "program_ids": ids,
            "requests": model.requests,
            "active": print(&s.active),
            "warnings": model.warnings,
        }))
    })
    .await
}

async fn job(State(app): State<AppState>, Path(id): Path<String>) -> Reply<Response> {
    let h = app.handle(&id)?;
    let state = h.job.lock().clone();
    let status = match (&state, h.failure.lock().as_ref()) {
        (JobState::Failed { .. }, Some(e)) => e.status(),
        _ => StatusCode::OK,
    };
    Ok((status, Json(state)).into_response())
}

#[derive(Deserialize)]
struct ResolveBody {
    program_id: Option<usize>,
    #[serde(default)]
    disabled: Vec<String>,
    #[serde(default)]
    stack: bool,
}

async fn resolve(State(app): State<AppState>, Path(id): Path<String>, JsonBody(body): JsonBody<ResolveBody>) -> Reply<Json<Value>> {
    let h = app.handle(&id)?;
    let aep = app.0.config.aep.clone();
    let work = move || -> Result<Value, ServiceError> {
        let (graph, from) = {
            let s = h.session.read();
            let from = match body.program_id {
                Some(pid) => s.program(pid)?.clone(),
                None => s
                    .programs
                    .iter()
                    .rev()
                    .find(|p| p.seeds.is_some())
                    .cloned()
                    .ok_or_else(|| ServiceError::NotFound("no solved program to re-solve".into()))?,
            };
            (s.graph.clone(), from)
        };
        let seeds = from
            .seeds
            .as_ref()
            .ok_or_else(|| ServiceError::Unprocessable(format!("program {} has no seed edits", from.id)))?;
        let out = propagate(&graph, seeds, &from.hints, &body.disabled, &aep)
            .map_err(|e| ServiceError::Unprocessable(e.to_string()))?;
        let mut s = h.session.write();
        let pid = s.store(StoredProgram {
            id: 0,
            origin: format!("resolved: {}", from.origin),
            program: out.program.clone(),
            report: Some(out.report.to_string()),
            seeds: Some(seeds.clone()),
            hints: from.hints.clone(),
            disabled: body.disabled.clone(),
        });
        s.install(pid, body.stack)?;
        Ok(json!({
            "program_id": pid,
            "program": print(&out.program),
            "maintained": out.maintained,
            "broken": out.broken,
            "stalled": out.stalled,
        }))
    };
    let v = tokio::task::spawn_blocking(work).await.map_err(|e| ServiceError::Unprocessable(e.to_string()))??;
    Ok(Json(v))
}

/// Evaluate the active program under the session's read lock.
fn with_shape<T>(
    h: &SessionHandle,
    values: &Assignment,
    f: impl FnOnce(&shapeprog_core::dsl::DeformedShape, &ShapeGraph) -> T,
) -> Result<T, ServiceError> {
    let s = h.session.read();
    let sigma = s.assignment(values);
    let (shape, _) = evaluate(&s.active, &s.graph, &sigma).map_err(|e| ServiceError::Unprocessable(e.to_string()))?;
    Ok(f(&shape, &s.graph))
}

async fn eval(State(app): State<AppState>, Path(id): Path<String>, JsonBody(values): JsonBody<Assignment>) -> Reply<Response> {
    let bytes = with_shape(&*app.handle(&id)?, &values, frame::encode)?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response())
}

async fn export(State(app): State<AppState>, Path(id): Path<String>, JsonBody(values): JsonBody<Assignment>) -> Reply<Response> {
    let text = with_shape(&*app.handle(&id)?, &values, |shape, graph| {
        let meshes = shape.meshes(graph);
        merged_obj(meshes.iter().map(|(id, m)| (id.as_str(), m)))
    })?;
    Ok(([(header::CONTENT_TYPE, "text/plain")], text).into_response())
}

fn params_json(s: &Session) -> Value {
    json!(s.params)
}

async fn get_params(State(app): State<AppState>, Path(id): Path<String>) -> Reply<Json<Value>> {
    Ok(Json(params_json(&app.handle(&id)?.session.read())))
}

async fn put_params(State(app): State<AppState>, Path(id): Path<String>, JsonBody(values): JsonBody<Assignment>) -> Reply<Json<Value>> {
    let h = app.handle(&id)?;
    let mut s = h.session.write();
    s.set_params(&values)?;
    Ok(Json(params_json(&s)))
}

fn stack_json(s: &Session) -> Value {
    json!({ "stack": s.stack, "program": print(&s.active), "params": s.params })
}

#[derive(Deserialize)]
struct ComposeBody {
    program_id: usize,
}

async fn compose(State(app): State<AppState>, Path(id): Path<String>, JsonBody(body): JsonBody<ComposeBody>) -> Reply<Json<Value>> {
    let h = app.handle(&id)?;
    let mut s = h.session.write();
    s.install(body.program_id, true)?;
    Ok(Json(stack_json(&s)))
}

#[derive(Deserialize)]
struct StackBody {
    program_ids: Vec<usize>,
}

async fn set_stack(State(app): State<AppState>, Path(id): Path<String>, JsonBody(body): JsonBody<StackBody>) -> Reply<Json<Value>> {
    let h = app.handle(&id)?;
    let mut s = h.session.write();
    s.set_stack(body.program_ids)?;
    Ok(Json(stack_json(&s)))
}

#[derive(Deserialize)]
struct Which {
    id: Option<usize>,
}

async fn get_program(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<Which>) -> Reply<Response> {
    let h = app.handle(&id)?;
    let s = h.session.read();
    let text = match q.id {
        Some(pid) => print(&s.program(pid)?.program),
        None => print(&s.active),
    };
    Ok(([(header::CONTENT_TYPE, "text/plain")], text).into_response())
}

#[derive(Deserialize)]
struct ProgramBody {
    text: String,
    #[serde(default)]
    stack: bool,
}

async fn post_program(State(app): State<AppState>, Path(id): Path<String>, JsonBody(body): JsonBody<ProgramBody>) -> Reply<impl IntoResponse> {
    let h = app.handle(&id)?;
    let mut s = h.session.write();
    let program = parse_for(&body.text, &s.graph).map_err(|e| ServiceError::Unprocessable(e.to_string()))?;
    let pid = s.store(StoredProgram {
        id: 0,
        origin: "uploaded".into(),
        program,
        report: None,
        seeds: None,
        hints: Default::default(),
        disabled: Vec::new(),
    });
    s.install(pid, body.stack)?;
    Ok((StatusCode::CREATED, Json(json!({ "program_id": pid, "active": print(&s.active) }))))
}

async fn report(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<Which>) -> Reply<Response> {
    let h = app.handle(&id)?;
    let s = h.session.read();
    let text = match q.id {
        Some(pid) => s.program(pid)?.report.clone(),
        None => s.stack.iter().rev().find_map(|&pid| s.programs[pid].report.clone()),
    }
    .ok_or_else(|| ServiceError::NotFound("no solver report".into()))?;
    Ok(([(header::CONTENT_TYPE, "text/plain")], text).into_response())
}
