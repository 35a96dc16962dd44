//! Corpus ingestion: structured records in, metadata-enriched chunks out.

mod chunker;
mod metadata;
mod record;
mod store;

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chunker::{semantic_chunk, section_paths, Chunker, ChunkingConfig};
pub use metadata::{enrich_metadata, MetadataRegistry};
pub use record::{parse_corpus, parse_structured_document, RecordError};
pub use store::{ChunkStore, IngestFailure, IngestStats, TokenDistribution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("invalid field `{field}`: {message}")]
    InvalidField { field: String, message: String },
    #[error("block {block}: unknown kind {kind:?}")]
    UnknownBlockKind { block: usize, kind: String },
    #[error("block {block}: {message}")]
    InvalidBlock { block: usize, message: String },
    #[error("duplicate doc_id {0:?}")]
    DuplicateDocument(String),
    #[error("doc_id {0:?} not present in metadata registry")]
    UnknownDocument(String),
    #[error("invalid chunking config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockKind {
    Heading { level: u8 },
    Paragraph,
    TableRow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    #[serde(flatten)]
    pub kind: BlockKind,
    pub text: String,
}

impl Block {
    pub fn heading(level: u8, text: impl Into<String>) -> Self {
        Self { kind: BlockKind::Heading { level }, text: text.into() }
    }

    pub fn paragraph(text: impl Into<String>) -> Self {
        Self { kind: BlockKind::Paragraph, text: text.into() }
    }

    pub fn table_row(text: impl Into<String>) -> Self {
        Self { kind: BlockKind::TableRow, text: text.into() }
    }

    pub fn heading_level(&self) -> Option<u8> {
        match self.kind {
            BlockKind::Heading { level } => Some(level),
            _ => None,
        }
    }
}

/// Document-level metadata as supplied with the record. Every field is
/// optional; chunks inherit these as defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataDefaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance_level: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub supplier_tags: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub version_timestamp: NaiveDate,
    pub title: String,
    pub source_tag: String,
    pub blocks: Vec<Block>,
    #[serde(default)]
    pub metadata: MetadataDefaults,
}

/// Half-open `[start, end)` range of block indices in the parent document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockRange {
    pub start: usize,
    pub end: usize,
}

impl BlockRange {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkMetadata {
    pub doc_id: String,
    pub version: NaiveDate,
    pub section_path: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance_level: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub supplier_tags: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub section_path: Vec<String>,
    pub block_range: BlockRange,
    pub token_count: usize,
    pub text: String,
    pub metadata: ChunkMetadata,
}

pub const MIN_YEAR: i32 = 1990;
pub const MAX_YEAR: i32 = 2100;

pub(crate) fn check_year(year: i32) -> Result<(), IngestError> {
    if (MIN_YEAR..=MAX_YEAR).contains(&year) {
        Ok(())
    } else {
        Err(IngestError::InvalidField {
            field: "metadata.year".into(),
            message: format!("{year} outside {MIN_YEAR}..={MAX_YEAR}"),
        })
    }
}
