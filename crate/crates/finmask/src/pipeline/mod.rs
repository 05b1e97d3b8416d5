//! Pipeline stages behind the CLI subcommands. Each stage reads the previous
//! stage's files, writes its own atomically, and drops a manifest (config
//! digest, tool version, seeds, input/output digests) next to the outputs so
//! any artifact is traceable to the exact run that produced it. Nothing here
//! records wall-clock time: a repeated run over identical inputs produces
//! byte-identical files.

pub mod annotate;
pub mod build;
pub mod evaluate;
pub mod ingest;
pub mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use finmask_core::ingest::FormatTag;
use finmask_core::task::TaskInstance;
use finmask_core::UnitLexicon;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{LoadedConfig, ModelConfig, StubBehavior};
use crate::gateway::{
    CompletionCache, DefaultReply, HttpTransport, ModelClient, StubTransport,
};
use crate::lexfile;
use crate::records::write_atomic;

/// Well-known file locations under the output directory.
pub struct OutputLayout {
    root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: PathBuf) -> OutputLayout {
        OutputLayout { root }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn sentences(&self) -> PathBuf {
        self.root.join("sentences.jsonl")
    }

    pub fn tables(&self) -> PathBuf {
        self.root.join("tables.jsonl")
    }

    pub fn benchmark(&self) -> PathBuf {
        self.root.join("benchmark.jsonl")
    }

    pub fn annotations(&self) -> PathBuf {
        self.root.join("annotations.jsonl")
    }

    pub fn consensus(&self) -> PathBuf {
        self.root.join("consensus.jsonl")
    }

    pub fn annotated_benchmark(&self) -> PathBuf {
        self.root.join("benchmark_annotated.jsonl")
    }

    pub fn predictions(&self, model_name: &str) -> PathBuf {
        self.root.join("predictions").join(format!("{model_name}.jsonl"))
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report").join("report.json")
    }

    pub fn report_text(&self) -> PathBuf {
        self.root.join("report").join("report.txt")
    }

    pub fn stage_manifest(&self, stage: &str) -> PathBuf {
        self.root.join("manifests").join(format!("{stage}.json"))
    }

    pub fn failures(&self, stage: &str) -> PathBuf {
        self.root.join("failures").join(format!("{stage}.jsonl"))
    }
}

impl LoadedConfig {
    pub fn layout(&self) -> OutputLayout {
        OutputLayout::new(self.output_dir())
    }
}

/// Provenance record written next to each stage's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: String,
    pub tool_version: String,
    pub config_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Input file name → content sha256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name → content sha256.
    pub outputs: BTreeMap<String, String>,
    pub counts: BTreeMap<String, u64>,
}

impl StageManifest {
    pub fn new(stage: &str, loaded: &LoadedConfig) -> StageManifest {
        StageManifest {
            stage: stage.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: loaded.sha256.clone(),
            seed: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(file_name(path), file_sha256(path)?);
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.insert(file_name(path), file_sha256(path)?);
        Ok(())
    }

    pub fn count(&mut self, key: &str, value: u64) {
        self.counts.insert(key.to_string(), value);
    }

    pub fn write(&self, layout: &OutputLayout) -> Result<()> {
        let path = layout.stage_manifest(&self.stage);
        let body = serde_json::to_vec_pretty(self)?;
        write_atomic(&path, &body).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes =
        fs::read(path).with_context(|| format!("hashing {} for manifest", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// The filing corpus manifest: which documents to ingest and how to read
/// them. Paths are relative to the manifest file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilingsManifest {
    pub filings: Vec<FilingEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilingEntry {
    pub path: PathBuf,
    pub company_id: String,
    /// ISO calendar date, `YYYY-MM-DD`.
    pub filing_date: String,
    pub format: FormatTag,
}

impl FilingsManifest {
    pub fn load(path: &Path) -> Result<FilingsManifest> {
        let bytes = fs::read(path)
            .with_context(|| format!("reading filings manifest {}", path.display()))?;
        let manifest: FilingsManifest = serde_json::from_slice(&bytes)
            .with_context(|| format!("parsing filings manifest {}", path.display()))?;
        let mut seen = std::collections::BTreeSet::new();
        for entry in &manifest.filings {
            if !seen.insert(entry.company_id.as_str()) {
                bail!(
                    "filings manifest lists company `{}` more than once; task ids \
                     would collide",
                    entry.company_id
                );
            }
        }
        Ok(manifest)
    }
}

/// Loads the configured unit lexicon, or the built-in default.
pub fn load_lexicon(loaded: &LoadedConfig) -> Result<UnitLexicon> {
    match loaded.lexicon_path() {
        None => Ok(lexfile::default_lexicon()),
        Some(path) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading lexicon {}", path.display()))?;
            lexfile::parse_lexicon(&text)
                .with_context(|| format!("parsing lexicon {}", path.display()))
        }
    }
}

/// Builds a client for a configured model. `echo_tasks` supplies the answer
/// book for `echo_benchmark` stubs and is only available during evaluation.
pub fn build_model(
    name: &str,
    model: &ModelConfig,
    cache_dir: &Path,
    echo_tasks: Option<&[TaskInstance]>,
) -> Result<ModelClient> {
    let cache = Some(CompletionCache::new(cache_dir));
    match model {
        ModelConfig::Stub { behavior, wrong_every, drop_scale_every } => {
            let transport = match behavior {
                StubBehavior::AnswerAll => StubTransport::new(DefaultReply::AnswerAll),
                StubBehavior::Unanswerable => StubTransport::new(DefaultReply::RejectAll),
                StubBehavior::ProseOnly => StubTransport::new(DefaultReply::ProseOnly),
                StubBehavior::EchoBenchmark => {
                    let tasks = echo_tasks.with_context(|| {
                        format!(
                            "model `{name}` echoes the benchmark and can only be used \
                             as an evaluation subject"
                        )
                    })?;
                    StubTransport::echo_from_tasks(tasks, *wrong_every, *drop_scale_every)
                }
            };
            Ok(ModelClient::new(name, Arc::new(transport), cache, None))
        }
        ModelConfig::Http { endpoint, api_key_env, rate_limit_per_sec, max_tokens, timeout_secs } => {
            let transport = HttpTransport::new(
                endpoint.clone(),
                api_key_env.as_deref(),
                *rate_limit_per_sec,
                Duration::from_secs(*timeout_secs),
            )
            .with_context(|| format!("configuring HTTP model `{name}`"))?;
            Ok(ModelClient::new(name, Arc::new(transport), cache, *max_tokens))
        }
    }
}

/// One skipped or degraded item, recorded in the stage's failures file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub task_id: String,
    pub model_name: String,
    pub error: String,
}

pub fn write_failures(
    layout: &OutputLayout,
    stage: &str,
    mut failures: Vec<FailureRecord>,
) -> Result<usize> {
    failures.sort_by(|a, b| {
        (a.task_id.as_str(), a.model_name.as_str()).cmp(&(b.task_id.as_str(), b.model_name.as_str()))
    });
    let path = layout.failures(stage);
    let body = crate::records::to_jsonl(&failures)?;
    write_atomic(&path, body.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(failures.len())
}
