//! Blocking client for the shapeprog service.
//!
//! ```no_run
//! use shapeprog_client::{Client, NewSession};
//!
//! let c = Client::new("http://127.0.0.1:7878");
//! let s = c.create_session(&NewSession::fixture("chair")).unwrap();
//! let r = c.request(&s.id, "widen the chair").unwrap();
//! println!("{}", r.program);
//! let frame = c.eval(&s.id, &[("x".to_string(), 0.4)].into()).unwrap();
//! println!("{} parts", frame.parts.len());
//! ```

mod frame;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use reqwest::blocking::{RequestBuilder, Response};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use frame::{decode_frame, Frame, FrameError, FramePart};

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot reach the service: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("HTTP {status}: {message}")]
    Status { status: u16, message: String },
    #[error("bad evaluation frame: {0}")]
    Frame(#[from] FrameError),
    #[error("job still running after {0:?}")]
    Timeout(Duration),
}

impl ClientError {
    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Status { status, .. } => Some(*status),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct NewSession {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<String>,
}

impl NewSession {
    pub fn fixture(name: &str) -> NewSession {
        NewSession { fixture: Some(name.into()), ..NewSession::default() }
    }

    /// A manifest path as seen by the service.
    pub fn manifest(path: &str) -> NewSession {
        NewSession { manifest: Some(path.into()), ..NewSession::default() }
    }

    pub fn graph(text: String) -> NewSession {
        NewSession { graph: Some(text), ..NewSession::default() }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub shape: String,
    pub graph: Value,
    #[serde(default)]
    pub stack: Vec<usize>,
}

/// Provider overrides for inference calls; `None` keeps the service's
/// configuration.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RequestOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub votes: Option<usize>,
    /// Compose onto the current stack instead of replacing it.
    pub stack: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EditResult {
    pub program_id: usize,
    pub program: String,
    pub active: String,
    pub bundle: Value,
    pub maintained: Vec<String>,
    pub broken: Vec<String>,
    pub stalled: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ResolveResult {
    pub program_id: usize,
    pub program: String,
    pub maintained: Vec<String>,
    pub broken: Vec<String>,
    pub stalled: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ProxyduralResult {
    pub program_ids: Vec<usize>,
    pub requests: Vec<String>,
    pub active: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct StackState {
    pub stack: Vec<usize>,
    pub program: String,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum JobState {
    Idle,
    Running { kind: String },
    Done { kind: String, result: Value },
    Failed { kind: String, error: String },
}

pub struct Client {
    base: String,
    http: reqwest::blocking::Client,
}

fn check(resp: Response) -> Result<Response, ClientError> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let text = resp.text().unwrap_or_default();
    let message = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| v["error"].as_str().map(str::to_string))
        .unwrap_or(text);
    Err(ClientError::Status { status: status.as_u16(), message })
}

impl Client {
    pub fn new(base: &str) -> Client {
        Client::with_timeout(base, Duration::from_secs(600))
    }

    pub fn with_timeout(base: &str, timeout: Duration) -> Client {
        let http = reqwest::blocking::Client::builder().timeout(timeout).build().expect("default TLS-free client builds");
        Client { base: base.trim_end_matches('/').to_string(), http }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn send(&self, req: RequestBuilder) -> Result<Response, ClientError> {
        check(req.send()?)
    }

    fn json<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T, ClientError> {
        Ok(self.send(req)?.json()?)
    }

    fn text(&self, req: RequestBuilder) -> Result<String, ClientError> {
        Ok(self.send(req)?.text()?)
    }

    pub fn create_session(&self, body: &NewSession) -> Result<SessionInfo, ClientError> {
        self.json(self.http.post(self.url("/session")).json(body))
    }

    /// Full session summary: graph, programs, stack, parameters, history.
    pub fn session(&self, id: &str) -> Result<Value, ClientError> {
        self.json(self.http.get(self.url(&format!("/session/{id}"))))
    }

    pub fn delete_session(&self, id: &str) -> Result<(), ClientError> {
        self.send(self.http.delete(self.url(&format!("/session/{id}"))))?;
        Ok(())
    }

    pub fn graph(&self, id: &str) -> Result<String, ClientError> {
        self.text(self.http.get(self.url(&format!("/session/{id}/graph"))))
    }

    pub fn topology(&self, id: &str) -> Result<Value, ClientError> {
        self.json(self.http.get(self.url(&format!("/session/{id}/topology"))))
    }

    pub fn request(&self, id: &str, text: &str) -> Result<EditResult, ClientError> {
        self.request_with(id, text, &RequestOptions::default())
    }

    /// Run inference and propagation and wait for the result.
    pub fn request_with(&self, id: &str, text: &str, opts: &RequestOptions) -> Result<EditResult, ClientError> {
        let mut body = serde_json::to_value(opts).expect("options serialize");
        body["text"] = json!(text);
        body["wait"] = json!(true);
        self.json(self.http.post(self.url(&format!("/session/{id}/request"))).json(&body))
    }

    /// Start inference in the background; poll with [`Client::job`].
    pub fn start_request(&self, id: &str, text: &str, opts: &RequestOptions) -> Result<(), ClientError> {
        let mut body = serde_json::to_value(opts).expect("options serialize");
        body["text"] = json!(text);
        self.send(self.http.post(self.url(&format!("/session/{id}/request"))).json(&body))?;
        Ok(())
    }

    pub fn proxydural(&self, id: &str, opts: &RequestOptions) -> Result<ProxyduralResult, ClientError> {
        let mut body = serde_json::to_value(opts).expect("options serialize");
        body["wait"] = json!(true);
        self.json(self.http.post(self.url(&format!("/session/{id}/proxydural"))).json(&body))
    }

    /// The job slot. A failed job comes back as `Ok(JobState::Failed)`
    /// even though the service answers it with an error status.
    pub fn job(&self, id: &str) -> Result<JobState, ClientError> {
        let resp = self.http.get(self.url(&format!("/session/{id}/job"))).send()?;
        if resp.status().as_u16() == 404 {
            return Err(check(resp).expect_err("404 is an error"));
        }
        Ok(resp.json()?)
    }

    pub fn wait_job(&self, id: &str, timeout: Duration) -> Result<JobState, ClientError> {
        let start = Instant::now();
        loop {
            let state = self.job(id)?;
            if !matches!(state, JobState::Running { .. }) {
                return Ok(state);
            }
            if start.elapsed() > timeout {
                return Err(ClientError::Timeout(timeout));
            }
            std::thread::sleep(Duration::from_millis(25));
        }
    }

    pub fn resolve(&self, id: &str, program_id: Option<usize>, disabled: &[&str]) -> Result<ResolveResult, ClientError> {
        let body = json!({ "program_id": program_id, "disabled": disabled });
        self.json(self.http.post(self.url(&format!("/session/{id}/resolve"))).json(&body))
    }

    /// Raw evaluation frame bytes.
    pub fn eval_bytes(&self, id: &str, params: &Params) -> Result<Vec<u8>, ClientError> {
        Ok(self.send(self.http.post(self.url(&format!("/session/{id}/eval"))).json(params))?.bytes()?.to_vec())
    }

    pub fn eval(&self, id: &str, params: &Params) -> Result<Frame, ClientError> {
        Ok(decode_frame(&self.eval_bytes(id, params)?)?)
    }

    /// Deformed meshes as one OBJ file.
    pub fn export(&self, id: &str, params: &Params) -> Result<String, ClientError> {
        self.text(self.http.post(self.url(&format!("/session/{id}/export"))).json(params))
    }

    pub fn params(&self, id: &str) -> Result<Params, ClientError> {
        self.json(self.http.get(self.url(&format!("/session/{id}/params"))))
    }

    pub fn set_params(&self, id: &str, params: &Params) -> Result<Params, ClientError> {
        self.json(self.http.put(self.url(&format!("/session/{id}/params"))).json(params))
    }

    pub fn compose(&self, id: &str, program_id: usize) -> Result<StackState, ClientError> {
        let body = json!({ "program_id": program_id });
        self.json(self.http.post(self.url(&format!("/session/{id}/compose"))).json(&body))
    }

    pub fn set_stack(&self, id: &str, program_ids: &[usize]) -> Result<StackState, ClientError> {
        let body = json!({ "program_ids": program_ids });
        self.json(self.http.post(self.url(&format!("/session/{id}/stack"))).json(&body))
    }

    /// The active program, or stored program `program_id`.
    pub fn program(&self, id: &str, program_id: Option<usize>) -> Result<String, ClientError> {
        let query = program_id.map_or(String::new(), |p| format!("?id={p}"));
        self.text(self.http.get(self.url(&format!("/session/{id}/program{query}"))))
    }

    /// Upload program text; it replaces the stack unless `stack` is set.
    pub fn upload_program(&self, id: &str, text: &str, stack: bool) -> Result<usize, ClientError> {
        let body = json!({ "text": text, "stack": stack });
        let v: Value = self.json(self.http.post(self.url(&format!("/session/{id}/program"))).json(&body))?;
        Ok(v["program_id"].as_u64().unwrap_or_default() as usize)
    }

    pub fn report(&self, id: &str, program_id: Option<usize>) -> Result<String, ClientError> {
        let query = program_id.map_or(String::new(), |p| format!("?id={p}"));
        self.text(self.http.get(self.url(&format!("/session/{id}/report{query}"))))
    }
}
