//! Single-file TOML configuration. Every section is optional and falls back to
//! the component defaults; unknown keys are rejected. Relative paths resolve
//! against the directory holding the config file.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::FusionConfig;
use crate::ingest::ChunkingConfig;
use crate::lexical::{Bm25Params, DomainDictionary, TokenizerOptions};
use crate::orchestrator::{BreakerConfig, RetryPolicy, RoutingPolicy, WeightedRule};
use crate::vector::HnswParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Holds chunks, index snapshots, the manifest and staged ingests.
    pub data_dir: PathBuf,
    /// Defaults to `<data_dir>/provenance.jsonl`.
    pub provenance: Option<PathBuf>,
    /// Defaults to `<data_dir>/ledger.jsonl`.
    pub ledger: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self { data_dir: PathBuf::from("data"), provenance: None, ledger: None }
    }
}

impl PathsConfig {
    pub fn chunks(&self) -> PathBuf {
        self.data_dir.join("chunks.jsonl")
    }

    pub fn lexical_snapshot(&self) -> PathBuf {
        self.data_dir.join("lexical.idx")
    }

    pub fn vector_snapshot(&self) -> PathBuf {
        self.data_dir.join("vectors.idx")
    }

    pub fn manifest(&self) -> PathBuf {
        self.data_dir.join("manifest.json")
    }

    pub fn pending(&self) -> PathBuf {
        self.data_dir.join("pending.jsonl")
    }

    pub fn provenance_store(&self) -> PathBuf {
        self.provenance.clone().unwrap_or_else(|| self.data_dir.join("provenance.jsonl"))
    }

    pub fn ledger_file(&self) -> PathBuf {
        self.ledger.clone().unwrap_or_else(|| self.data_dir.join("ledger.jsonl"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityConfig {
    pub weights: WeightedRule,
    /// Replaces the built-in cross-reference patterns when set.
    pub reference_patterns: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub model_id: Option<String>,
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub timeout_secs: f64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self { kind: ProviderKind::Mock, model_id: None, endpoint: None, api_key_env: None, timeout_secs: 30.0 }
    }
}

impl ProviderConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    pub fn api_key(&self) -> Option<String> {
        self.api_key_env.as_ref().and_then(|v| std::env::var(v).ok())
    }

    fn validate(&self, id: &str) -> Result<(), ConfigError> {
        if self.kind == ProviderKind::Http && self.endpoint.is_none() {
            return Err(ConfigError::Invalid(format!("provider {id:?}: kind = \"http\" needs an endpoint")));
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(ConfigError::Invalid(format!("provider {id:?}: timeout_secs must be > 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    #[default]
    Builtin,
    Http,
}

/// `kind = "http"` needs `endpoint`; the other fields then name the remote model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub kind: EmbeddingKind,
    pub provider_id: String,
    pub model_id: String,
    pub endpoint: Option<String>,
    pub api_key_env: Option<String>,
    pub timeout_secs: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            kind: EmbeddingKind::Builtin,
            provider_id: "remote".into(),
            model_id: "default".into(),
            endpoint: None,
            api_key_env: None,
            timeout_secs: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { bind: "127.0.0.1:8080".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvenanceConfig {
    /// Keep the full prompt text in each record, not only its digest.
    pub store_prompt: bool,
    pub coverage_threshold: f64,
}

impl Default for ProvenanceConfig {
    fn default() -> Self {
        Self { store_prompt: false, coverage_threshold: crate::provenance::DEFAULT_COVERAGE_THRESHOLD }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub paths: PathsConfig,
    pub tokenizer: TokenizerOptions,
    pub dictionary: DomainDictionary,
    /// Surface token → concept key, shared by the built-in embedder and the
    /// overlap reranker.
    pub lexicon: BTreeMap<String, String>,
    pub chunking: ChunkingConfig,
    pub bm25: Bm25Params,
    pub hnsw: HnswParams,
    pub fusion: FusionConfig,
    pub complexity: ComplexityConfig,
    pub routing: RoutingPolicy,
    pub retry: RetryPolicy,
    pub breaker: BreakerConfig,
    pub providers: BTreeMap<String, ProviderConfig>,
    pub embedding: EmbeddingConfig,
    pub server: ServerConfig,
    pub provenance: ProvenanceConfig,
}

impl SystemConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: SystemConfig = toml::from_str(text)
            .map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.paths.data_dir);
        if let Some(p) = self.paths.provenance.as_mut() {
            fix(p);
        }
        if let Some(p) = self.paths.ledger.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |e: String| ConfigError::Invalid(e);
        self.dictionary.validate().map_err(|e| inv(e.to_string()))?;
        self.chunking.validate().map_err(|e| inv(e.to_string()))?;
        self.bm25.validate().map_err(|e| inv(e.to_string()))?;
        self.hnsw.validate().map_err(|e| inv(e.to_string()))?;
        self.fusion.validate().map_err(|e| inv(e.to_string()))?;
        self.complexity.weights.validate().map_err(inv)?;
        if let Some(p) = &self.complexity.reference_patterns {
            for pat in p {
                regex::Regex::new(pat).map_err(|e| inv(format!("reference pattern {pat:?}: {e}")))?;
            }
        }
        self.routing.validate().map_err(|e| inv(e.to_string()))?;
        self.retry.validate().map_err(|e| inv(e.to_string()))?;
        if self.breaker.failure_threshold == 0 {
            return Err(inv("breaker.failure_threshold must be >= 1".into()));
        }
        for (id, p) in &self.providers {
            p.validate(id)?;
        }
        if self.embedding.kind == EmbeddingKind::Http && self.embedding.endpoint.is_none() {
            return Err(inv("embedding.kind = \"http\" needs an endpoint".into()));
        }
        if !(0.0..=1.0).contains(&self.provenance.coverage_threshold) {
            return Err(inv("provenance.coverage_threshold must be in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn lexicon_map(&self) -> HashMap<String, String> {
        self.lexicon.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// Every provider id named by a routing tier or a fallback chain.
    pub fn referenced_providers(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .routing
            .tiers
            .iter()
            .flat_map(|t| std::iter::once(&t.provider_id).chain(&t.fallback_chain))
            .cloned()
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }
}
