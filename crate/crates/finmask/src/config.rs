//! Pipeline configuration: one TOML file drives every stage. Relative paths
//! are resolved against the config file's directory, so a config checked in
//! next to its fixtures works from any working directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Parsed pipeline configuration. Field defaults are chosen so a minimal
/// config only names the input manifest and the models.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    #[serde(default)]
    pub lexicon: LexiconConfig,
    #[serde(default)]
    pub build: BuildConfig,
    #[serde(default)]
    pub annotate: AnnotateConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
    #[serde(default)]
    pub models: BTreeMap<String, ModelConfig>,
    #[serde(default)]
    pub cache: CacheConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// JSON manifest listing the filing documents to ingest.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconConfig {
    /// Unit lexicon TOML; the built-in default lexicon when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    /// Sentences sampled per document.
    #[serde(default = "default_sample_n")]
    pub sample_n: usize,
    /// Sampling seed; identical seeds give identical benchmarks.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_sample_n() -> usize {
    10
}

fn default_seed() -> u64 {
    7
}

impl Default for BuildConfig {
    fn default() -> BuildConfig {
        BuildConfig { sample_n: default_sample_n(), seed: default_seed() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotateConfig {
    /// Model names (keys of `[models.*]`) forming the answerability panel.
    #[serde(default)]
    pub panel: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    /// Model names (keys of `[models.*]`) to evaluate.
    #[serde(default)]
    pub models: Vec<String>,
    /// Worker threads per model evaluation.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
}

fn default_concurrency() -> usize {
    1
}

impl Default for EvaluateConfig {
    fn default() -> EvaluateConfig {
        EvaluateConfig { models: Vec::new(), concurrency: default_concurrency() }
    }
}

/// How a named model is reached.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Deterministic in-process model; no network.
    Stub {
        behavior: StubBehavior,
        /// Echo behavior: rotate the digits of every nth answer.
        #[serde(default)]
        wrong_every: Option<u64>,
        /// Echo behavior: drop the scale word from every nth answer.
        #[serde(default)]
        drop_scale_every: Option<u64>,
    },
    /// Chat-completion HTTP endpoint.
    Http {
        endpoint: String,
        /// Environment variable holding the bearer token.
        #[serde(default)]
        api_key_env: Option<String>,
        /// Calls per second; 0 disables throttling.
        #[serde(default)]
        rate_limit_per_sec: f64,
        #[serde(default)]
        max_tokens: Option<u32>,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: u64,
    },
}

fn default_timeout_secs() -> u64 {
    60
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StubBehavior {
    /// Calls every tagged span answerable.
    AnswerAll,
    /// Calls every tagged span unanswerable.
    Unanswerable,
    /// Replies with prose; never yields valid JSON.
    ProseOnly,
    /// Echoes each task's ground truth (with configured perturbations).
    EchoBenchmark,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheConfig {
    #[serde(default = "default_cache_dir")]
    pub dir: PathBuf,
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from(".finmask-cache")
}

impl Default for CacheConfig {
    fn default() -> CacheConfig {
        CacheConfig { dir: default_cache_dir() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> OutputConfig {
        OutputConfig { dir: default_output_dir() }
    }
}

/// A parsed config plus where it came from and a digest of its bytes. The
/// digest goes into stage manifests so outputs are traceable to the exact
/// configuration that produced them.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    pub base_dir: PathBuf,
    pub sha256: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
        let bytes = fs::read(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), source: e })?;
        let text = String::from_utf8_lossy(&bytes);
        let config: PipelineConfig = toml::from_str(&text)?;
        config.validate()?;
        let base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        Ok(LoadedConfig { config, base_dir, sha256: hex::encode(Sha256::digest(&bytes)) })
    }

    /// Resolves a config-relative path.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.resolve(&self.config.input.manifest)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output.dir)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.resolve(&self.config.cache.dir)
    }

    pub fn lexicon_path(&self) -> Option<PathBuf> {
        self.config.lexicon.path.as_deref().map(|p| self.resolve(p))
    }
}

impl PipelineConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.build.sample_n == 0 {
            return Err(ConfigError::Invalid("build.sample_n must be at least 1".into()));
        }
        if self.evaluate.concurrency == 0 {
            return Err(ConfigError::Invalid("evaluate.concurrency must be at least 1".into()));
        }
        for name in self.annotate.panel.iter().chain(&self.evaluate.models) {
            if !self.models.contains_key(name) {
                return Err(ConfigError::Invalid(format!(
                    "model `{name}` is referenced but has no [models.{name}] section"
                )));
            }
        }
        for (name, model) in &self.models {
            if let ModelConfig::Http { endpoint, .. } = model {
                if endpoint.is_empty() {
                    return Err(ConfigError::Invalid(format!(
                        "model `{name}` has an empty endpoint"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("pipeline.toml");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"
[input]
manifest = "filings/manifest.json"
"#,
        );
        let loaded = LoadedConfig::load(&path).unwrap();
        assert_eq!(loaded.config.build.sample_n, 10);
        assert_eq!(loaded.config.build.seed, 7);
        assert_eq!(loaded.config.evaluate.concurrency, 1);
        assert_eq!(loaded.manifest_path(), dir.path().join("filings/manifest.json"));
        assert_eq!(loaded.output_dir(), dir.path().join("out"));
        assert_eq!(loaded.sha256.len(), 64);
    }

    #[test]
    fn full_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"
[input]
manifest = "m.json"

[build]
sample_n = 4
seed = 99

[annotate]
panel = ["anno-a", "anno-b"]

[evaluate]
models = ["subject"]
concurrency = 3

[models.anno-a]
kind = "stub"
behavior = "answer_all"

[models.anno-b]
kind = "stub"
behavior = "unanswerable"

[models.subject]
kind = "stub"
behavior = "echo_benchmark"
wrong_every = 5

[models.remote]
kind = "http"
endpoint = "https://example.invalid/v1/chat/completions"
api_key_env = "EXAMPLE_API_KEY"
rate_limit_per_sec = 2.0
max_tokens = 512

[cache]
dir = "cache"

[output]
dir = "results"
"#,
        );
        let loaded = LoadedConfig::load(&path).unwrap();
        let cfg = &loaded.config;
        assert_eq!(cfg.build.seed, 99);
        assert_eq!(cfg.annotate.panel.len(), 2);
        assert!(matches!(
            cfg.models["subject"],
            ModelConfig::Stub { behavior: StubBehavior::EchoBenchmark, wrong_every: Some(5), .. }
        ));
        assert!(matches!(cfg.models["remote"], ModelConfig::Http { .. }));
        assert_eq!(loaded.cache_dir(), dir.path().join("cache"));
    }

    #[test]
    fn unknown_model_reference_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"
[input]
manifest = "m.json"

[annotate]
panel = ["ghost"]
"#,
        );
        let err = LoadedConfig::load(&path).unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn typo_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"
[input]
manifest = "m.json"

[build]
sample_count = 4
"#,
        );
        assert!(matches!(LoadedConfig::load(&path), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn zero_sample_n_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            "[input]\nmanifest = \"m.json\"\n\n[build]\nsample_n = 0\n",
        );
        assert!(matches!(LoadedConfig::load(&path), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn absolute_paths_pass_through() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            "[input]\nmanifest = \"/abs/m.json\"\n",
        );
        let loaded = LoadedConfig::load(&path).unwrap();
        assert_eq!(loaded.manifest_path(), PathBuf::from("/abs/m.json"));
    }
}
