use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::featurizer::FeaturizerConfig;
use crate::vindex::IndexKind;

/// File locations. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Signal manifest (JSONL) for the retrieval corpus.
    pub signals: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    /// Optional separate query split; without it the corpus queries itself.
    pub query_signals: Option<PathBuf>,
    pub query_embeddings: Option<PathBuf>,
    pub query_reports: Option<PathBuf>,
    pub qa: Option<PathBuf>,
    /// Training QA items for the majority baseline.
    pub qa_train: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    pub kind: IndexKind,
    pub nlist: usize,
    pub nprobe: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self { kind: IndexKind::Flat, nlist: 32, nprobe: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub k_report: usize,
    pub k_qa: usize,
    pub exclude_self: bool,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self { k_report: 1, k_qa: 3, exclude_self: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    /// No LLM: reports are not refined and QA is unavailable.
    None,
    #[default]
    Mock,
    Http,
}

impl std::str::FromStr for Provider {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Provider::None),
            "mock" => Ok(Provider::Mock),
            "http" => Ok(Provider::Http),
            _ => Err(Error::Config(format!("unknown provider {s:?} (none, mock, http)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub provider: Provider,
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra attempts after an unparseable answer or failed call.
    pub retries: u32,
    pub max_in_flight: usize,
    pub timeout_s: u64,
    pub backoff_base_ms: u64,
    /// Makes the mock return this text for every request.
    pub mock_response: Option<String>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            provider: Provider::Mock,
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            temperature: crate::qa::DEFAULT_TEMPERATURE,
            max_tokens: crate::qa::DEFAULT_MAX_TOKENS,
            retries: 2,
            max_in_flight: 4,
            timeout_s: 30,
            backoff_base_ms: 1000,
            mock_response: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: PathsConfig,
    pub featurizer: FeaturizerConfig,
    pub index: IndexConfig,
    pub retrieval: RetrievalConfig,
    pub llm: LlmConfig,
    pub seed: u64,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.featurizer.validate()?;
        if self.retrieval.k_report == 0 || self.retrieval.k_qa == 0 {
            return Err(Error::Config("k_report and k_qa must be >= 1".into()));
        }
        if self.index.nlist == 0 || self.index.nprobe == 0 || self.index.nprobe > self.index.nlist {
            return Err(Error::Config("index needs 1 <= nprobe <= nlist".into()));
        }
        if !(self.llm.temperature.is_finite() && self.llm.temperature >= 0.0) {
            return Err(Error::Config("llm temperature must be >= 0".into()));
        }
        if self.llm.max_tokens == 0 || self.llm.max_in_flight == 0 {
            return Err(Error::Config("llm max_tokens and max_in_flight must be >= 1".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Resolved path of an optional entry, or a config error naming the key.
    pub fn require(&self, p: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
        p.as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Config(format!("paths.{key} is required for this command")))
    }

    pub fn optional(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_deref().map(|p| self.resolve(p))
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        self.require(&self.paths.out_dir, "out_dir")
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory so
    /// that the same experiment written to two places hashes the same.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.paths.out_dir = None;
        let json = serde_json::to_string(&canon).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.retrieval.k_report, 1);
        assert_eq!(cfg.retrieval.k_qa, 3);
        assert_eq!(cfg.llm.temperature, 1.0);
        assert_eq!(cfg.llm.max_tokens, 256);
        assert_eq!(cfg.llm.retries, 2);
        assert_eq!(cfg.llm.max_in_flight, 4);
        assert_eq!(cfg.featurizer.d, 768);
        assert_eq!(cfg.llm.provider, Provider::Mock);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 1}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"retrieval": {"k_qa": 0}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg: RunConfig = serde_json::from_str(r#"{"index": {"nlist": 4, "nprobe": 5}}"#).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"paths": {"reports": "r.jsonl", "index": "/abs/i.idx"}}"#).unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.require(&cfg.paths.reports, "reports").unwrap(), dir.path().join("r.jsonl"));
        assert_eq!(cfg.optional(&cfg.paths.index).unwrap(), PathBuf::from("/abs/i.idx"));
        assert!(matches!(cfg.require(&cfg.paths.qa, "qa"), Err(Error::Config(m)) if m.contains("paths.qa")));
    }

    #[test]
    fn hash_ignores_out_dir_only() {
        let mut a = RunConfig::default();
        let h = a.hash();
        a.paths.out_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), h);
        a.seed = 7;
        assert_ne!(a.hash(), h);
        assert_eq!(h.len(), 64);
    }
}
