//! Pins `sample_sentences` to a recorded golden subset so any change to the
//! sampling discipline (RNG stream, shuffle order, post-sort) is caught.
//! The golden file was produced once by a standalone reference
//! implementation of the documented scheme (ChaCha8 seeded from the u64
//! seed, partial Fisher-Yates over ascending eligible indices, first n
//! slots, sorted) and is never regenerated from this crate.

use finmask_core::ingest::Sentence;
use finmask_core::span::{NumericSpan, SpanKind};
use finmask_core::task::sample_sentences;

fn fixture(count: usize) -> (Vec<Sentence>, Vec<NumericSpan>) {
    let mut sentences = Vec::with_capacity(count);
    let mut spans = Vec::with_capacity(count);
    for index in 0..count {
        let text = format!("Sentence {index} reports revenue of $1.0 million.");
        let len = text.len();
        sentences.push(Sentence { index, text, source_span: 0..len });
        spans.push(NumericSpan {
            sentence_index: index,
            char_range: 0..4,
            surface: "$1.0 million".to_string(),
            kind: SpanKind::Money,
            has_unit_or_scale: true,
        });
    }
    (sentences, spans)
}

#[test]
fn seed_zero_hundred_sentences_matches_golden_file() {
    let golden: Vec<usize> =
        serde_json::from_str(include_str!("golden/sample_seed0_n10.json")).unwrap();
    let (sentences, spans) = fixture(100);
    let picked = sample_sentences(&sentences, &spans, 10, 0);
    assert_eq!(picked, golden);
    assert!(picked.windows(2).all(|w| w[0] < w[1]), "subset must be ascending");
}
