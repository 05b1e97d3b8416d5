//! Build stage: sentence/table records in, benchmark file out. Per document,
//! detect and expand numeric spans, sample eligible sentences, and mask each
//! maskable span of each sampled sentence into its own task instance.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use finmask_core::ingest::{Sentence, TableBlock};
use finmask_core::span::detect_spans;
use finmask_core::task::{build_task, sample_sentences, DocumentContext, TaskInstance};

use crate::config::LoadedConfig;
use crate::records::{
    load_jsonl, write_benchmark, BenchmarkHeader, SentenceRecord, TableRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildSummary {
    pub documents: usize,
    pub sampled_sentences: usize,
    pub tasks: usize,
}

struct Document {
    filing_date: String,
    sentences: Vec<Sentence>,
    tables: Vec<TableBlock>,
}

pub fn run_build(loaded: &LoadedConfig) -> Result<BuildSummary> {
    let layout = loaded.layout();
    let sentence_records: Vec<SentenceRecord> = load_jsonl(&layout.sentences())
        .context("loading sentence records (run `ingest` first)")?;
    let table_records: Vec<TableRecord> =
        load_jsonl(&layout.tables()).context("loading table records (run `ingest` first)")?;
    let lexicon = super::load_lexicon(loaded)?;

    // Group records per document; BTreeMap fixes the processing order.
    let mut documents: BTreeMap<String, Document> = BTreeMap::new();
    for r in sentence_records {
        let doc = documents.entry(r.company_id).or_insert_with(|| Document {
            filing_date: r.filing_date,
            sentences: Vec::new(),
            tables: Vec::new(),
        });
        doc.sentences.push(r.sentence);
    }
    for r in table_records {
        if let Some(doc) = documents.get_mut(&r.company_id) {
            doc.tables.push(r.table);
        }
    }

    let sample_n = loaded.config.build.sample_n;
    let seed = loaded.config.build.seed;
    let mut tasks: Vec<TaskInstance> = Vec::new();
    let mut sampled_total = 0usize;
    for (company_id, doc) in &mut documents {
        doc.sentences.sort_by_key(|s| s.index);
        doc.tables.sort_by(|a, b| a.table_id.cmp(&b.table_id));
        let spans: Vec<_> =
            doc.sentences.iter().flat_map(|s| detect_spans(s, &lexicon)).collect();
        let sampled = sample_sentences(&doc.sentences, &spans, sample_n, seed);
        sampled_total += sampled.len();
        let ctx = DocumentContext {
            company_id,
            filing_date: &doc.filing_date,
            tables: &doc.tables,
            sentences: &doc.sentences,
        };
        for index in sampled {
            let sentence = doc
                .sentences
                .iter()
                .find(|s| s.index == index)
                .expect("sampled index comes from these sentences");
            let mut in_sentence: Vec<_> = spans
                .iter()
                .filter(|sp| sp.sentence_index == index && sp.has_unit_or_scale)
                .collect();
            in_sentence.sort_by_key(|sp| sp.char_range.start);
            for span in in_sentence {
                let task = build_task(&ctx, sentence, span).with_context(|| {
                    format!("masking span `{}` in document `{company_id}`", span.surface)
                })?;
                tasks.push(task);
            }
        }
    }

    let header = BenchmarkHeader::new(sample_n, seed, tasks.len());
    write_benchmark(&layout.benchmark(), &header, &tasks)
        .context("writing benchmark file")?;

    let mut manifest = super::StageManifest::new("build", loaded);
    manifest.seed = Some(seed);
    manifest.record_input(&layout.sentences())?;
    manifest.record_input(&layout.tables())?;
    manifest.record_output(&layout.benchmark())?;
    manifest.count("documents", documents.len() as u64);
    manifest.count("sampled_sentences", sampled_total as u64);
    manifest.count("tasks", tasks.len() as u64);
    manifest.write(&layout)?;

    Ok(BuildSummary { documents: documents.len(), sampled_sentences: sampled_total, tasks: tasks.len() })
}
