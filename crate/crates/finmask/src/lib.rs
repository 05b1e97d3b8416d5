//! Filing-grounded masked-span benchmarks: ingestion, task construction,
//! panel annotation, model evaluation, and reporting around the core
//! library, plus the on-disk record formats and the model gateway.

pub mod cli;
pub mod config;
pub mod gateway;
pub mod lexfile;
pub mod pipeline;
pub mod records;
