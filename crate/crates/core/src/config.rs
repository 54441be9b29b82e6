//! Settings file (TOML) with `SHAPEPROG_*` environment overrides.
//!
//! ```toml
//! [shape]
//! delta_rel = 1e-3
//! contact_rel = 5e-3
//!
//! [tau]
//! translate_rel = 0.5
//! scale = 1.0
//! rotate = 1.5707963267948966
//!
//! [aep]
//! n_samples = 16
//! seed = 24301
//! use_nhbd = true
//! allow_breaking = true
//!
//! [llm]
//! provider = "mock"          # or "remote"
//! votes = 5
//! mock_dir = "fixtures/transcripts"
//!
//! [llm.remote]
//! endpoint = "http://127.0.0.1:8000/v1/chat/completions"
//! model = "gpt-4"
//! timeout_secs = 120
//!
//! [llm.prompts]
//! chain_of_thought = true
//! in_context = true
//! reminders = true
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aep::AepConfig;
use crate::dsl::TauDefaults;
use crate::llm::{InferOptions, LlmError, MockProvider, PromptOptions, Provider, RemoteConfig, RemoteProvider};
use crate::shape::ShapeConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{var}={value}: {message}")]
    Env { var: String, value: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Mock,
    Remote,
}

impl FromStr for ProviderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(ProviderKind::Mock),
            "remote" => Ok(ProviderKind::Remote),
            other => Err(format!("unknown provider `{other}` (expected mock or remote)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub provider: ProviderKind,
    pub votes: usize,
    /// Transcript directory of the mock provider; the bundled transcripts
    /// when unset.
    pub mock_dir: Option<PathBuf>,
    pub remote: RemoteConfig,
    pub prompts: PromptOptions,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            provider: ProviderKind::Mock,
            votes: 5,
            mock_dir: None,
            remote: RemoteConfig::default(),
            prompts: PromptOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub shape: ShapeConfig,
    pub tau: TauDefaults,
    pub aep: AepConfig,
    pub llm: LlmConfig,
}

fn parse_env<T: FromStr>(var: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::Env {
        var: var.to_string(),
        value: value.to_string(),
        message: e.to_string(),
    })
}

impl Config {
    pub fn from_toml(text: &str, path: &str) -> Result<Config, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_string(), message: e.to_string() })
    }

    /// The file at `path` (defaults when `None`), then the process
    /// environment on top.
    pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let shown = p.display().to_string();
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
                Config::from_toml(&text, &shown)?
            }
            None => Config::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        macro_rules! set {
            ($var:literal, $field:expr) => {
                if let Some(v) = get($var) {
                    $field = parse_env($var, &v)?;
                }
            };
        }
        set!("SHAPEPROG_DELTA_REL", self.shape.delta_rel);
        set!("SHAPEPROG_CONTACT_REL", self.shape.contact_rel);
        set!("SHAPEPROG_TAU_TRANSLATE_REL", self.tau.translate_rel);
        set!("SHAPEPROG_TAU_SCALE", self.tau.scale);
        set!("SHAPEPROG_TAU_ROTATE", self.tau.rotate);
        set!("SHAPEPROG_N_SAMPLES", self.aep.n_samples);
        set!("SHAPEPROG_SEED", self.aep.seed);
        set!("SHAPEPROG_USE_NHBD", self.aep.use_nhbd);
        set!("SHAPEPROG_ALLOW_BREAKING", self.aep.allow_breaking);
        set!("SHAPEPROG_LLM_PROVIDER", self.llm.provider);
        set!("SHAPEPROG_LLM_VOTES", self.llm.votes);
        set!("SHAPEPROG_LLM_ENDPOINT", self.llm.remote.endpoint);
        set!("SHAPEPROG_LLM_MODEL", self.llm.remote.model);
        set!("SHAPEPROG_LLM_TIMEOUT", self.llm.remote.timeout_secs);
        if let Some(v) = get("SHAPEPROG_LLM_MOCK_DIR") {
            self.llm.mock_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = get("SHAPEPROG_LLM_API_KEY") {
            self.llm.remote.api_key = (!v.is_empty()).then_some(v);
        }
        Ok(())
    }

    pub fn provider(&self) -> Result<Box<dyn Provider>, LlmError> {
        Ok(match self.llm.provider {
            ProviderKind::Mock => match &self.llm.mock_dir {
                Some(d) => Box::new(MockProvider::new(d)),
                None => Box::new(MockProvider::builtin()),
            },
            ProviderKind::Remote => Box::new(RemoteProvider::new(self.llm.remote.clone())?),
        })
    }

    pub fn infer_options(&self, shape: &str) -> InferOptions {
        InferOptions { shape: shape.to_string(), n_votes: self.llm.votes, prompts: self.llm.prompts, tau: self.tau }
    }
}
