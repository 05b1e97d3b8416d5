//! Ingest stage: filings manifest in, sentence/table record files out.

use anyhow::{Context, Result};
use finmask_core::ingest::{extract_mdna, load_filing, parse_section, SegmenterConfig};

use crate::config::LoadedConfig;
use crate::records::{SentenceRecord, TableRecord};

use super::{FilingsManifest, StageManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestSummary {
    pub documents: usize,
    pub sentences: usize,
    pub tables: usize,
}

pub fn run_ingest(loaded: &LoadedConfig) -> Result<IngestSummary> {
    let manifest_path = loaded.manifest_path();
    let filings = FilingsManifest::load(&manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| std::path::Path::new("."));
    let segmenter = SegmenterConfig::default();

    let mut sentence_records: Vec<SentenceRecord> = Vec::new();
    let mut table_records: Vec<TableRecord> = Vec::new();
    for entry in &filings.filings {
        let path = base.join(&entry.path);
        let bytes = std::fs::read(&path)
            .with_context(|| format!("reading filing {}", path.display()))?;
        let filing = load_filing(&bytes, entry.format, &entry.company_id, &entry.filing_date)
            .with_context(|| format!("loading filing {}", path.display()))?;
        let section = extract_mdna(&filing)
            .with_context(|| format!("locating the discussion section in {}", path.display()))?;
        let parse = parse_section(section.slice(&filing.body), &segmenter)
            .with_context(|| format!("parsing tables in {}", path.display()))?;
        for sentence in parse.sentences {
            sentence_records.push(SentenceRecord {
                company_id: filing.company_id.clone(),
                filing_date: filing.filing_date.clone(),
                sentence,
            });
        }
        for table in parse.tables {
            table_records.push(TableRecord {
                company_id: filing.company_id.clone(),
                filing_date: filing.filing_date.clone(),
                table,
            });
        }
    }

    let layout = loaded.layout();
    crate::records::write_jsonl(&layout.sentences(), &sentence_records)
        .context("writing sentence records")?;
    crate::records::write_jsonl(&layout.tables(), &table_records)
        .context("writing table records")?;

    let mut manifest = StageManifest::new("ingest", loaded);
    manifest.record_input(&manifest_path)?;
    manifest.record_output(&layout.sentences())?;
    manifest.record_output(&layout.tables())?;
    manifest.count("documents", filings.filings.len() as u64);
    manifest.count("sentences", sentence_records.len() as u64);
    manifest.count("tables", table_records.len() as u64);
    manifest.write(&layout)?;

    Ok(IngestSummary {
        documents: filings.filings.len(),
        sentences: sentence_records.len(),
        tables: table_records.len(),
    })
}
