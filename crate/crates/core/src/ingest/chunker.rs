//! Boundary-respecting chunk packing.
//!
//! A document is cut into sections at every heading. Within a section, blocks
//! are packed in order: the current chunk closes when the next block would
//! push it past `max_tokens`, or once it has reached `target_tokens` territory
//! and adding the next block would land further from the target than
//! stopping now. A trailing piece below `min_tokens` is folded back into the
//! previous chunk of the same section when that stays within `max_tokens`.
//! Blocks are never split; a single block above `max_tokens` becomes its own
//! oversized chunk.

use serde::{Deserialize, Serialize};

use super::{BlockRange, Chunk, ChunkMetadata, Document, IngestError};
use crate::lexical::{Analyzer, DomainDictionary, TokenizerOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkingConfig {
    pub target_tokens: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        Self { target_tokens: 384, min_tokens: 64, max_tokens: 768 }
    }
}

impl ChunkingConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.min_tokens == 0
            || self.min_tokens > self.target_tokens
            || self.target_tokens > self.max_tokens
        {
            return Err(IngestError::InvalidConfig(format!(
                "need 0 < min ({}) <= target ({}) <= max ({})",
                self.min_tokens, self.target_tokens, self.max_tokens
            )));
        }
        Ok(())
    }
}

/// Section path in effect at every block (a heading's own path includes it).
pub fn section_paths(doc: &Document) -> Vec<Vec<String>> {
    let mut stack: Vec<(u8, String)> = Vec::new();
    doc.blocks
        .iter()
        .map(|block| {
            if let Some(level) = block.heading_level() {
                while stack.last().is_some_and(|(l, _)| *l >= level) {
                    stack.pop();
                }
                stack.push((level, block.text.trim().to_string()));
            }
            stack.iter().map(|(_, t)| t.clone()).collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Chunker {
    cfg: ChunkingConfig,
    analyzer: Analyzer,
}

impl Chunker {
    pub fn new(cfg: ChunkingConfig, analyzer: Analyzer) -> Result<Self, IngestError> {
        cfg.validate()?;
        Ok(Self { cfg, analyzer })
    }

    pub fn config(&self) -> &ChunkingConfig {
        &self.cfg
    }

    pub fn chunk(&self, doc: &Document) -> Vec<Chunk> {
        if doc.blocks.is_empty() {
            return Vec::new();
        }
        let counts: Vec<usize> =
            doc.blocks.iter().map(|b| self.analyzer.count_tokens(&b.text)).collect();
        let paths = section_paths(doc);

        let mut ranges = Vec::new();
        let mut section_start = 0;
        for i in 1..=doc.blocks.len() {
            if i == doc.blocks.len() || doc.blocks[i].heading_level().is_some() {
                self.pack_section(&counts, section_start, i, &mut ranges);
                section_start = i;
            }
        }

        ranges
            .into_iter()
            .enumerate()
            .map(|(ordinal, range)| {
                let text = doc.blocks[range.start..range.end]
                    .iter()
                    .map(|b| b.text.as_str())
                    .collect::<Vec<_>>()
                    .join("\n");
                let section_path = paths[range.start].clone();
                Chunk {
                    chunk_id: format!("{}#{:04}", doc.doc_id, ordinal),
                    doc_id: doc.doc_id.clone(),
                    section_path: section_path.clone(),
                    block_range: range,
                    token_count: counts[range.start..range.end].iter().sum(),
                    text,
                    metadata: ChunkMetadata {
                        doc_id: doc.doc_id.clone(),
                        version: doc.version_timestamp,
                        section_path,
                        category: None,
                        compliance_level: None,
                        supplier_tags: Default::default(),
                        year: None,
                    },
                }
            })
            .collect()
    }

    fn pack_section(&self, counts: &[usize], start: usize, end: usize, out: &mut Vec<BlockRange>) {
        let ChunkingConfig { target_tokens: target, min_tokens: min, max_tokens: max } = self.cfg;
        let first = out.len();
        let mut cur = BlockRange { start, end: start };
        let mut cur_tokens = 0usize;
        for (i, &next) in counts.iter().enumerate().take(end).skip(start) {
            if !cur.is_empty() {
                let grown = cur_tokens + next;
                let close = grown > max
                    || (grown > target && target.abs_diff(cur_tokens) <= grown.abs_diff(target));
                if close {
                    out.push(cur);
                    cur = BlockRange { start: i, end: i };
                    cur_tokens = 0;
                }
            }
            cur.end = i + 1;
            cur_tokens += next;
        }
        if cur.is_empty() {
            return;
        }
        if cur_tokens < min && out.len() > first {
            let prev = out.last_mut().expect("previous chunk in section");
            let prev_tokens: usize = counts[prev.start..prev.end].iter().sum();
            if prev_tokens + cur_tokens <= max {
                prev.end = cur.end;
                return;
            }
        }
        out.push(cur);
    }
}

/// Chunk with the default analyzer (no dictionary).
pub fn semantic_chunk(doc: &Document, cfg: &ChunkingConfig) -> Result<Vec<Chunk>, IngestError> {
    let analyzer = Analyzer::new(&DomainDictionary::default(), TokenizerOptions::default());
    Ok(Chunker::new(*cfg, analyzer)?.chunk(doc))
}
