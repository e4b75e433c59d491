//! Run settings shared by every command.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::hints::DEFAULT_HINT_CAP;
use crate::llm::{BackendConfig, BackendKind};
use crate::prompting::DEFAULT_TOP_K;

pub const DEFAULT_MAX_HOP: u32 = 3;
pub const DEFAULT_SHOTS: usize = 5;
pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_TEMPERATURE: f64 = 1.0;
pub const DEFAULT_TOKEN_BUDGET: usize = 3840;
pub const DEFAULT_MAX_NEW_TOKENS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_hop: u32,
    pub shots: usize,
    pub n_samples: usize,
    pub temperature: f64,
    pub top_k: usize,
    pub hint_cap: usize,
    pub backend: BackendConfig,
    pub index: Option<PathBuf>,
    pub typedb: Option<PathBuf>,
    /// Prompt size limit in estimated tokens; `None` disables the check.
    pub token_budget: Option<usize>,
    pub max_new_tokens: usize,
    /// Use these example ids for every target instead of retrieval.
    pub fixed_examples: Vec<String>,
    pub flat_slices: bool,
    pub strict_text: bool,
    pub qualified_hints: bool,
    /// Accepted for reproducibility bookkeeping; no stage is randomized.
    pub seed: u64,
    /// Worker threads for `infer`; 0 picks the number of CPUs.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_hop: DEFAULT_MAX_HOP,
            shots: DEFAULT_SHOTS,
            n_samples: DEFAULT_SAMPLES,
            temperature: DEFAULT_TEMPERATURE,
            top_k: DEFAULT_TOP_K,
            hint_cap: DEFAULT_HINT_CAP,
            backend: BackendConfig::default(),
            index: None,
            typedb: None,
            token_budget: Some(DEFAULT_TOKEN_BUDGET),
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
            fixed_examples: Vec::new(),
            flat_slices: false,
            strict_text: false,
            qualified_hints: false,
            seed: 0,
            jobs: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid setting: {0}")]
    Invalid(String),
}

/// Keys accepted in a config file. Relative paths resolve against the file's
/// directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    max_hop: Option<u32>,
    shots: Option<usize>,
    samples: Option<usize>,
    temperature: Option<f64>,
    top_k: Option<usize>,
    hint_cap: Option<usize>,
    index: Option<PathBuf>,
    typedb: Option<PathBuf>,
    token_budget: Option<usize>,
    max_new_tokens: Option<usize>,
    fixed_examples: Option<Vec<String>>,
    flat_slices: Option<bool>,
    strict_text: Option<bool>,
    qualified_hints: Option<bool>,
    seed: Option<u64>,
    jobs: Option<usize>,
    backend: Option<BackendKind>,
    base_url: Option<String>,
    model: Option<String>,
    api_key_env: Option<String>,
    timeout_secs: Option<u64>,
    max_retries: Option<u32>,
    max_in_flight: Option<usize>,
    max_batch: Option<usize>,
    mock_fixtures: Option<PathBuf>,
}

macro_rules! apply {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl RunConfig {
    /// Defaults overlaid with the settings of a TOML file.
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base).map_err(|e| match e {
            ConfigError::Toml { source, .. } => ConfigError::Toml {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let f: ConfigFile = toml::from_str(text).map_err(|source| ConfigError::Toml {
            path: PathBuf::new(),
            source,
        })?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let mut c = RunConfig::default();
        apply!(c.max_hop, f.max_hop);
        apply!(c.shots, f.shots);
        apply!(c.n_samples, f.samples);
        apply!(c.temperature, f.temperature);
        apply!(c.top_k, f.top_k);
        apply!(c.hint_cap, f.hint_cap);
        c.index = f.index.map(resolve);
        c.typedb = f.typedb.map(resolve);
        match f.token_budget {
            Some(0) => c.token_budget = None,
            Some(b) => c.token_budget = Some(b),
            None => {}
        }
        apply!(c.max_new_tokens, f.max_new_tokens);
        apply!(c.fixed_examples, f.fixed_examples);
        apply!(c.flat_slices, f.flat_slices);
        apply!(c.strict_text, f.strict_text);
        apply!(c.qualified_hints, f.qualified_hints);
        apply!(c.seed, f.seed);
        apply!(c.jobs, f.jobs);
        apply!(c.backend.kind, f.backend);
        if let Some(url) = f.base_url {
            c.backend.base_url = Some(url);
        }
        apply!(c.backend.model, f.model);
        apply!(c.backend.api_key_env, f.api_key_env);
        if let Some(s) = f.timeout_secs {
            c.backend.timeout = Duration::from_secs(s);
        }
        apply!(c.backend.max_retries, f.max_retries);
        apply!(c.backend.max_in_flight, f.max_in_flight);
        apply!(c.backend.max_batch, f.max_batch);
        c.backend.mock_fixtures = f.mock_fixtures.map(resolve);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.n_samples == 0 {
            return bad("samples must be at least 1");
        }
        if self.top_k == 0 {
            return bad("top-k must be at least 1");
        }
        if !(self.temperature >= 0.0) {
            return bad("temperature must be non-negative");
        }
        if self.max_new_tokens == 0 {
            return bad("max-new-tokens must be at least 1");
        }
        Ok(())
    }
}
