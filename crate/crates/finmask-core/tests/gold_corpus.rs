//! Runs the hand-labeled gold corpora: span detection over 50 sentences and
//! sentence segmentation over a set of hand-segmented inputs. Expected
//! outputs live in `tests/data/` and were derived by hand from the documented
//! rules; they must never be regenerated from the implementation they test.

mod common;

use finmask_core::ingest::{segment_sentences, SegmenterConfig, Sentence};
use finmask_core::span::{detect_spans, SpanKind};
use serde::Deserialize;

#[derive(Deserialize)]
struct SpanCorpus {
    cases: Vec<SpanCase>,
}

#[derive(Deserialize)]
struct SpanCase {
    text: String,
    spans: Vec<GoldSpan>,
}

#[derive(Deserialize, Debug, PartialEq, Eq)]
struct GoldSpan {
    surface: String,
    kind: SpanKind,
    maskable: bool,
}

#[derive(Deserialize)]
struct SentenceCorpus {
    cases: Vec<SentenceCase>,
}

#[derive(Deserialize)]
struct SentenceCase {
    text: String,
    sentences: Vec<String>,
}

fn sentence(text: &str) -> Sentence {
    Sentence { index: 0, text: text.to_string(), source_span: 0..text.len() }
}

#[test]
fn span_detection_matches_gold_labels() {
    let corpus: SpanCorpus =
        serde_json::from_str(include_str!("data/gold_spans.json")).expect("valid gold file");
    assert_eq!(corpus.cases.len(), 50, "gold corpus holds fifty sentences");
    let lexicon = common::default_lexicon();

    let mut mismatches = Vec::new();
    for case in &corpus.cases {
        let sent = sentence(&case.text);
        let detected = detect_spans(&sent, &lexicon);

        // Structural sanity independent of the labels: spans are ordered,
        // non-overlapping, and each surface is the exact slice of its range.
        let mut last_end = 0usize;
        for span in &detected {
            assert!(span.char_range.start >= last_end, "overlap in {:?}", case.text);
            assert_eq!(
                &case.text[span.char_range.clone()],
                span.surface,
                "surface must slice out of the sentence"
            );
            last_end = span.char_range.end;
        }

        let got: Vec<GoldSpan> = detected
            .iter()
            .map(|s| GoldSpan {
                surface: s.surface.clone(),
                kind: s.kind,
                maskable: s.has_unit_or_scale,
            })
            .collect();
        if got != case.spans {
            mismatches.push(format!(
                "text: {:?}\n  expected: {:?}\n  got:      {:?}",
                case.text, case.spans, got
            ));
        }
    }
    assert!(
        mismatches.is_empty(),
        "{} of 50 sentences disagree with the gold labels:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}

#[test]
fn segmentation_matches_gold_labels() {
    let corpus: SentenceCorpus =
        serde_json::from_str(include_str!("data/gold_sentences.json")).expect("valid gold file");
    let config = SegmenterConfig::default();

    let mut mismatches = Vec::new();
    for case in &corpus.cases {
        let segmented = segment_sentences(&case.text, &config);
        for (i, s) in segmented.iter().enumerate() {
            assert_eq!(s.index, i, "indices are consecutive from zero");
            assert_eq!(
                &case.text[s.source_span.clone()],
                s.text,
                "sentence text must slice out of the input"
            );
        }
        let got: Vec<String> = segmented.into_iter().map(|s| s.text).collect();
        if got != case.sentences {
            mismatches.push(format!(
                "text: {:?}\n  expected: {:?}\n  got:      {:?}",
                case.text, case.sentences, got
            ));
        }
    }
    assert!(
        mismatches.is_empty(),
        "{} segmentation cases disagree with the gold labels:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}

/// Masking then restoring every maskable gold span must reproduce the exact
/// original sentence (round-trip identity over the hand-labeled corpus).
#[test]
fn gold_spans_mask_and_restore() {
    let corpus: SpanCorpus =
        serde_json::from_str(include_str!("data/gold_spans.json")).expect("valid gold file");
    let lexicon = common::default_lexicon();
    let mut restored = 0usize;
    for case in &corpus.cases {
        let sent = sentence(&case.text);
        for span in detect_spans(&sent, &lexicon) {
            if !span.has_unit_or_scale {
                continue;
            }
            let ctx = finmask_core::task::DocumentContext {
                company_id: "gold",
                filing_date: "2024-01-01",
                tables: &[],
                sentences: core::slice::from_ref(&sent),
            };
            let task =
                finmask_core::task::build_task(&ctx, &sent, &span).expect("maskable span");
            assert_eq!(task.restore(), case.text, "mask/restore must be the identity");
            restored += 1;
        }
    }
    assert!(restored >= 40, "corpus should exercise many maskable spans, got {restored}");
}
