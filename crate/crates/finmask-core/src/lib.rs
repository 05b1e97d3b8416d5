//! Core algorithms for building masked-number benchmarks from financial
//! filings and scoring model predictions against them.
//!
//! The crate is `no_std` compatible (allocation required) and carries no IO:
//! everything here is a pure function over strings and records. File formats,
//! the model gateway, and the CLI live in the companion `finmask` crate.
//!
//! Pipeline, front to back:
//!
//! 1. [`ingest`] — locate the MD&A section of a filing, split tables (with
//!    their explanatory pre-text sentence) from narrative text, and segment
//!    the narrative into sentences.
//! 2. [`span`] — detect numeric spans in sentences and expand them over
//!    adjacent currency marks, scale words, and units.
//! 3. [`task`] — mask one span per instance and assemble the surrounding
//!    context (all tables plus the neighbouring sentences).
//! 4. [`agreement`] — fold a panel of answerability votes into a unanimous
//!    consensus and report agreement against human labels.
//! 5. [`matcher`] — decide whether a predicted span denotes the same quantity
//!    as the ground truth: exact decimal normalization, precision-relaxed
//!    rounding, and unit-group subset matching.
//! 6. [`score`] — aggregate per-model prediction records into stratified
//!    accuracy reports and a scale-error census.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod agreement;
pub mod decimal;
pub mod ingest;
pub mod lexicon;
pub mod matcher;
pub mod score;
pub mod span;
pub mod task;

pub use decimal::Decimal;
pub use lexicon::{GroupId, UnitGroup, UnitLexicon};
pub use matcher::{match_spans, MatchResult, NormalizedNumber};
