//! Filing ingestion: decoding, section location, table/narrative separation,
//! and sentence segmentation.
//!
//! The stages compose front to back: [`load_filing`] decodes bytes into a
//! [`Filing`], [`extract_mdna`] locates the management-discussion section,
//! [`extract_tables`] pulls table blocks (each with its explanatory pre-text
//! sentence) out of the section, and [`segment_sentences`] splits the residual
//! narrative into ordered sentences. [`parse_section`] runs the last two in
//! one call and keeps all offsets in section coordinates so the partition
//! property (tables, pre-texts, and sentences never overlap) is directly
//! checkable.

mod filing;
mod section;
mod sentence;
mod table;

pub use filing::{load_filing, Filing, FormatTag, LoadError};
pub use section::{extract_mdna, DocumentSection, SectionError};
pub use sentence::{join_sentences, segment_sentences, SegmenterConfig, Sentence};
pub use table::{
    extract_tables, parse_section, NarrativeChunk, SectionParse, TableBlock, TableParseError,
};
