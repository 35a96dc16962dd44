//! Retrieval-augmented generation backbone for technical requirements corpora.

mod codec;

pub mod embedding;
pub mod config;
pub mod eval;
pub mod fusion;
pub mod ingest;
pub mod lexical;
pub mod money;
pub mod orchestrator;
pub mod pipeline;
pub mod provenance;
pub mod synthetic;
pub mod vector;

pub use codec::SnapshotError;
