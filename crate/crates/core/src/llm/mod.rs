//! Completion backends: an OpenAI-compatible chat endpoint and a local mock.

mod http;
mod mock;

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::HttpChatBackend;
pub use mock::{MockBackend, MockFixture};

pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const OFFLINE_ENV: &str = "TYPEPROMPT_OFFLINE";

/// Identifies the target a request is about; mock fixtures are keyed by it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleKey {
    pub file: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub n_samples: usize,
    pub temperature: f64,
    pub max_new_tokens: usize,
    pub model: String,
    #[serde(default)]
    pub key: Option<SampleKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: Option<String>,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_in_flight: usize,
    /// Largest `n` asked for in one request.
    pub max_batch: usize,
    /// Canned generations for the mock; without them the mock echoes the
    /// ground truth it was given.
    pub mock_fixtures: Option<std::path::PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Http,
            base_url: Some("https://api.openai.com/v1".into()),
            model: "gpt-3.5-turbo".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            timeout: Duration::from_secs(60),
            max_retries: 5,
            max_in_flight: 4,
            max_batch: 50,
            mock_fixtures: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("request timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("request failed: {0}")]
    Transport(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error("remote access to {0} is disabled")]
    NetworkDenied(String),
    #[error("no mock generation for {file} / {target}")]
    MissingFixture { file: String, target: String },
}

pub trait Completer: Send + Sync {
    /// Exactly `req.n_samples` generations.
    fn complete(&self, req: &CompletionRequest) -> Result<Vec<String>, LlmError>;
}

static DENY_REMOTE: AtomicBool = AtomicBool::new(false);

/// Blocks requests to any non-loopback host for the rest of the process.
pub fn deny_remote(deny: bool) {
    DENY_REMOTE.store(deny, Ordering::SeqCst);
}

pub fn remote_denied() -> bool {
    DENY_REMOTE.load(Ordering::SeqCst)
        || std::env::var(OFFLINE_ENV).is_ok_and(|v| !v.is_empty() && v != "0")
}

/// Rough token count: never below the whitespace token count, and at least
/// one token per four characters.
pub fn estimate_tokens(text: &str) -> usize {
    let words = text.split_whitespace().count();
    let chars = text.chars().count().div_ceil(4);
    words.max(chars)
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.n_samples == 0 {
            return Err(LlmError::Config("n_samples must be at least 1".into()));
        }
        if self.max_new_tokens == 0 {
            return Err(LlmError::Config("max_new_tokens must be at least 1".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(LlmError::Config("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

/// Backend for a configuration. `ground_truth` feeds the mock's echo mode:
/// target id → annotation.
pub fn connect(
    cfg: &BackendConfig,
    ground_truth: std::collections::BTreeMap<String, String>,
) -> Result<Box<dyn Completer>, LlmError> {
    match cfg.kind {
        BackendKind::Http => Ok(Box::new(HttpChatBackend::new(cfg)?)),
        BackendKind::Mock => match &cfg.mock_fixtures {
            Some(path) => Ok(Box::new(MockBackend::from_fixture_file(path)?)),
            None => Ok(Box::new(MockBackend::echo(ground_truth))),
        },
    }
}
