use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Chunk, IngestError, RecordError};

/// Chunks in ingestion order with an id lookup. Persisted as JSONL.
#[derive(Debug, Clone, Default)]
pub struct ChunkStore {
    chunks: Vec<Chunk>,
    by_id: HashMap<String, usize>,
}

impl ChunkStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_chunks(chunks: Vec<Chunk>) -> Result<Self, IngestError> {
        let mut store = Self::new();
        for c in chunks {
            store.insert(c)?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, chunk: Chunk) -> Result<(), IngestError> {
        if self.by_id.contains_key(&chunk.chunk_id) {
            return Err(IngestError::InvalidField {
                field: "chunk_id".into(),
                message: format!("duplicate chunk id {:?}", chunk.chunk_id),
            });
        }
        self.by_id.insert(chunk.chunk_id.clone(), self.chunks.len());
        self.chunks.push(chunk);
        Ok(())
    }

    pub fn remove(&mut self, chunk_id: &str) -> Option<Chunk> {
        let idx = self.by_id.remove(chunk_id)?;
        let removed = self.chunks.remove(idx);
        for (i, c) in self.chunks.iter().enumerate().skip(idx) {
            self.by_id.insert(c.chunk_id.clone(), i);
        }
        Some(removed)
    }

    pub fn get(&self, chunk_id: &str) -> Option<&Chunk> {
        self.by_id.get(chunk_id).map(|&i| &self.chunks[i])
    }

    pub fn text(&self, chunk_id: &str) -> Option<&str> {
        self.get(chunk_id).map(|c| c.text.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Chunk> {
        self.chunks.iter()
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for c in &self.chunks {
            serde_json::to_writer(&mut w, c)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut store = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let chunk: Chunk = serde_json::from_str(&line).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1))
            })?;
            store
                .insert(chunk)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
        }
        Ok(store)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenDistribution {
    pub mean: f64,
    pub std_dev: f64,
    pub min: usize,
    pub max: usize,
}

impl TokenDistribution {
    pub fn from_counts(counts: &[usize]) -> Self {
        if counts.is_empty() {
            return Self::default();
        }
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / n;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std_dev: var.sqrt(),
            min: *counts.iter().min().unwrap(),
            max: *counts.iter().max().unwrap(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IngestStats {
    pub documents: usize,
    pub chunks: usize,
    pub tokens: TokenDistribution,
    pub errors: Vec<IngestFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestFailure {
    pub line: usize,
    pub doc_id: Option<String>,
    pub message: String,
}

impl From<&RecordError> for IngestFailure {
    fn from(e: &RecordError) -> Self {
        Self { line: e.line, doc_id: e.doc_id.clone(), message: e.error.to_string() }
    }
}
