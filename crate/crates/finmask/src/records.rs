//! Line-delimited record files: the benchmark format (header line plus one
//! task per line) and plain JSONL helpers for sentences, tables, consensus
//! results, and prediction records.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use finmask_core::agreement::ConsensusResult;
use finmask_core::ingest::{Sentence, TableBlock};
use finmask_core::score::PredictionRecord;
use finmask_core::task::TaskInstance;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

/// Version of the benchmark file layout this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing header line")]
    MissingHeader,
    #[error("unsupported schema version {found} (this build reads version {SCHEMA_VERSION})")]
    UnsupportedVersion { found: u32 },
}

fn io_err(path: &Path, source: std::io::Error) -> RecordError {
    RecordError::Io { path: path.display().to_string(), source }
}

/// First line of a benchmark file: layout version plus the sampling
/// parameters that produced the task set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkHeader {
    pub schema_version: u32,
    /// Sentences sampled per document.
    pub sample_n: usize,
    pub seed: u64,
    /// Sampling discipline, recorded for provenance.
    pub sampling: String,
    pub task_count: usize,
}

impl BenchmarkHeader {
    pub fn new(sample_n: usize, seed: u64, task_count: usize) -> BenchmarkHeader {
        BenchmarkHeader {
            schema_version: SCHEMA_VERSION,
            sample_n,
            seed,
            sampling: "per-document partial Fisher-Yates over eligible sentences, sorted ascending"
                .to_string(),
            task_count,
        }
    }
}

/// Serializes a benchmark to its line-delimited text form.
pub fn serialize_benchmark(
    header: &BenchmarkHeader,
    tasks: &[TaskInstance],
) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    out.push_str(&serde_json::to_string(header)?);
    out.push('\n');
    for task in tasks {
        out.push_str(&serde_json::to_string(task)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses a benchmark from its text form, validating the header.
pub fn parse_benchmark(text: &str) -> Result<(BenchmarkHeader, Vec<TaskInstance>), RecordError> {
    let mut lines = text.lines().enumerate();
    let header: BenchmarkHeader = match lines.next() {
        None => return Err(RecordError::MissingHeader),
        Some((_, first)) => serde_json::from_str(first)
            .map_err(|e| RecordError::Parse { line: 1, message: e.to_string() })?,
    };
    if header.schema_version != SCHEMA_VERSION {
        return Err(RecordError::UnsupportedVersion { found: header.schema_version });
    }
    let mut tasks = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let task: TaskInstance = serde_json::from_str(line)
            .map_err(|e| RecordError::Parse { line: idx + 1, message: e.to_string() })?;
        tasks.push(task);
    }
    if tasks.len() != header.task_count {
        return Err(RecordError::Parse {
            line: 1,
            message: format!(
                "header declares {} tasks but the file holds {}",
                header.task_count,
                tasks.len()
            ),
        });
    }
    Ok((header, tasks))
}

pub fn load_benchmark(path: &Path) -> Result<(BenchmarkHeader, Vec<TaskInstance>), RecordError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_benchmark(&text)
}

/// Writes a file atomically: content goes to `<path>.tmp`, then a rename
/// publishes it.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<(), RecordError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(content).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn write_benchmark(
    path: &Path,
    header: &BenchmarkHeader,
    tasks: &[TaskInstance],
) -> Result<(), RecordError> {
    let text = serialize_benchmark(header, tasks)
        .map_err(|e| RecordError::Parse { line: 0, message: e.to_string() })?;
    write_atomic(path, text.as_bytes())
}

/// One sentence of a document, tagged with its source filing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub company_id: String,
    pub filing_date: String,
    #[serde(flatten)]
    pub sentence: Sentence,
}

/// One table of a document, tagged with its source filing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRecord {
    pub company_id: String,
    pub filing_date: String,
    #[serde(flatten)]
    pub table: TableBlock,
}

/// Serializes any record sequence as headerless JSONL.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses headerless JSONL, reporting the 1-based offending line on error.
pub fn from_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, RecordError> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line)
            .map_err(|e| RecordError::Parse { line: idx + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), RecordError> {
    let text = to_jsonl(records)
        .map_err(|e| RecordError::Parse { line: 0, message: e.to_string() })?;
    write_atomic(path, text.as_bytes())
}

pub fn load_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecordError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    from_jsonl(&text)
}

pub fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>, RecordError> {
    load_jsonl(path)
}

pub fn load_consensus(path: &Path) -> Result<Vec<ConsensusResult>, RecordError> {
    load_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use finmask_core::span::SpanKind;
    use finmask_core::task::{ContextSet, HintText};

    fn sample_task(i: usize) -> TaskInstance {
        TaskInstance {
            task_id: format!("{i:016x}"),
            company_id: "alpha".into(),
            filing_date: "2024-02-15".into(),
            sentence_index: i,
            char_range: 12..24,
            corrupted_sentence: "Revenue was [MASK] in 2024.".into(),
            ground_truth: "$500 million".into(),
            span_kind: SpanKind::Money,
            hint: HintText { unit_description: "as an absolute amount".into() },
            context: ContextSet { tables: vec![], prev_sentence: None, next_sentence: None },
            answerability: None,
            scenario: None,
        }
    }

    #[test]
    fn benchmark_round_trip_is_identity() {
        let tasks: Vec<TaskInstance> = (0..25).map(sample_task).collect();
        let header = BenchmarkHeader::new(10, 42, tasks.len());
        let text = serialize_benchmark(&header, &tasks).unwrap();
        let (h2, t2) = parse_benchmark(&text).unwrap();
        assert_eq!(header, h2);
        assert_eq!(tasks, t2);
        // Serialization is deterministic.
        assert_eq!(text, serialize_benchmark(&h2, &t2).unwrap());
    }

    #[test]
    fn large_benchmark_round_trips() {
        // Sized like the main split's answerable-span count.
        let tasks: Vec<TaskInstance> = (0..2406).map(sample_task).collect();
        let header = BenchmarkHeader::new(10, 7, tasks.len());
        let text = serialize_benchmark(&header, &tasks).unwrap();
        let (h2, t2) = parse_benchmark(&text).unwrap();
        assert_eq!(h2.task_count, 2406);
        assert_eq!(t2.len(), 2406);
    }

    #[test]
    fn rejects_future_schema_version() {
        let tasks = vec![sample_task(0)];
        let mut header = BenchmarkHeader::new(1, 0, 1);
        header.schema_version = 99;
        let text = serialize_benchmark(&header, &tasks).unwrap();
        assert!(matches!(
            parse_benchmark(&text),
            Err(RecordError::UnsupportedVersion { found: 99 })
        ));
    }

    #[test]
    fn reports_offending_line() {
        let tasks = vec![sample_task(0)];
        let header = BenchmarkHeader::new(1, 0, 1);
        let mut text = serialize_benchmark(&header, &tasks).unwrap();
        text.push_str("{not json\n");
        match parse_benchmark(&text) {
            Err(RecordError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_missing_header() {
        assert!(matches!(parse_benchmark(""), Err(RecordError::MissingHeader)));
    }

    #[test]
    fn header_task_count_is_checked() {
        let tasks = vec![sample_task(0), sample_task(1)];
        let header = BenchmarkHeader::new(1, 0, 5);
        let text = serialize_benchmark(&header, &tasks).unwrap();
        assert!(matches!(parse_benchmark(&text), Err(RecordError::Parse { .. })));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.jsonl");
        write_atomic(&path, b"one\n").unwrap();
        write_atomic(&path, b"two\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two\n");
        assert!(!path.with_extension("jsonl.tmp").exists());
    }
}
