//! Chat-completion providers.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::prompt::{Prompt, Workflow};
use super::LlmError;

pub trait Provider: Send + Sync {
    /// One completion. `seed` distinguishes the samples of a vote.
    fn complete(&self, prompt: &Prompt, temperature: f64, seed: Option<u64>) -> Result<String, LlmError>;
}

/// Lowercase words joined by `-`: "Widen the chair!" becomes
/// `widen-the-chair`.
pub fn slug(text: &str) -> String {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join("-")
}

/// Replays transcript files.
///
/// Inference answers live in `<dir>/<shape>/<request-slug>/<workflow>.txt`;
/// a validity answer for one relation may override the shared file as
/// `valid-<relation>.txt`. Proxydural answers live in
/// `<dir>/<shape>/proxydural.txt`. A file holds one or more responses
/// separated by lines containing only `---`; sample `k` of a vote gets
/// response `k mod n`.
#[derive(Debug, Clone)]
pub struct MockProvider {
    dir: PathBuf,
}

impl MockProvider {
    pub fn new(dir: impl Into<PathBuf>) -> MockProvider {
        MockProvider { dir: dir.into() }
    }

    /// The transcripts shipped with the fixtures.
    pub fn builtin() -> MockProvider {
        MockProvider::new(builtin_transcripts())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn candidates(&self, prompt: &Prompt) -> Vec<PathBuf> {
        let shape = self.dir.join(&prompt.shape);
        if prompt.workflow == Workflow::Proxydural {
            return vec![shape.join("proxydural.txt")];
        }
        let base = shape.join(slug(&prompt.request));
        let mut out = Vec::new();
        if let Some(s) = &prompt.subject {
            out.push(base.join(format!("{}-{s}.txt", prompt.workflow)));
        }
        out.push(base.join(format!("{}.txt", prompt.workflow)));
        out
    }
}

pub fn builtin_transcripts() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("transcripts")
}

pub fn split_responses(text: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    for line in text.lines() {
        if line.trim() == "---" {
            out.push(String::new());
        } else {
            let cur = out.last_mut().expect("never empty");
            cur.push_str(line);
            cur.push('\n');
        }
    }
    out.into_iter().filter(|r| !r.trim().is_empty()).collect()
}

impl Provider for MockProvider {
    fn complete(&self, prompt: &Prompt, _temperature: f64, seed: Option<u64>) -> Result<String, LlmError> {
        let candidates = self.candidates(prompt);
        let Some(path) = candidates.iter().find(|p| p.is_file()) else {
            return Err(LlmError::ProviderUnavailable(format!("no transcript at {}", candidates[candidates.len() - 1].display())));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::ProviderUnavailable(format!("{}: {e}", path.display())))?;
        let responses = split_responses(&text);
        if responses.is_empty() {
            return Ok(String::new());
        }
        let k = seed.unwrap_or(0) as usize % responses.len();
        Ok(responses[k].clone())
    }
}

/// Settings of an OpenAI-compatible chat-completion endpoint.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    /// Full URL of the chat-completions route.
    pub endpoint: String,
    pub model: String,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub timeout_secs: u64,
}

impl std::fmt::Debug for RemoteConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteConfig")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<set>"))
            .field("timeout_secs", &self.timeout_secs)
            .finish()
    }
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "gpt-4".into(),
            api_key: None,
            timeout_secs: 120,
        }
    }
}

const SYSTEM: &str = "You answer shape editing questions using the exact answer-line grammar given in the prompt.";

pub struct RemoteProvider {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

impl RemoteProvider {
    pub fn new(config: RemoteConfig) -> Result<RemoteProvider, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| LlmError::ProviderUnavailable(e.to_string()))?;
        Ok(RemoteProvider { config, client })
    }
}

impl Provider for RemoteProvider {
    fn complete(&self, prompt: &Prompt, temperature: f64, seed: Option<u64>) -> Result<String, LlmError> {
        let mut body = json!({
            "model": self.config.model,
            "temperature": temperature,
            "messages": [
                {"role": "system", "content": SYSTEM},
                {"role": "user", "content": prompt.text},
            ],
        });
        if let Some(s) = seed {
            body["seed"] = json!(s);
        }
        let mut req = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| LlmError::ProviderUnavailable(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            let text: String = text.chars().take(200).collect();
            return Err(LlmError::ProviderUnavailable(format!("HTTP {status}: {text}")));
        }
        let parsed: ChatResponse =
            resp.json().map_err(|e| LlmError::ProviderUnavailable(format!("bad response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LlmError::ProviderUnavailable("response has no message content".into()))
    }
}
