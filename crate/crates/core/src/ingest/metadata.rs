use std::collections::HashMap;

use chrono::{Datelike, NaiveDate};

use super::{check_year, Chunk, Document, IngestError, MetadataDefaults};

/// Per-document metadata defaults, keyed by doc_id.
#[derive(Debug, Clone, Default)]
pub struct MetadataRegistry {
    entries: HashMap<String, (NaiveDate, MetadataDefaults)>,
}

impl MetadataRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_documents<'a, I: IntoIterator<Item = &'a Document>>(docs: I) -> Self {
        let mut reg = Self::new();
        for doc in docs {
            reg.insert(&doc.doc_id, doc.version_timestamp, doc.metadata.clone());
        }
        reg
    }

    pub fn insert(&mut self, doc_id: &str, version: NaiveDate, defaults: MetadataDefaults) {
        self.entries.insert(doc_id.to_string(), (version, defaults));
    }

    pub fn get(&self, doc_id: &str) -> Option<&(NaiveDate, MetadataDefaults)> {
        self.entries.get(doc_id)
    }
}

/// Merge registry defaults into a chunk. Values already set on the chunk win;
/// the year falls back to the document's version date.
pub fn enrich_metadata(mut chunk: Chunk, registry: &MetadataRegistry) -> Result<Chunk, IngestError> {
    let (version, defaults) = registry
        .get(&chunk.doc_id)
        .ok_or_else(|| IngestError::UnknownDocument(chunk.doc_id.clone()))?;
    let m = &mut chunk.metadata;
    m.doc_id = chunk.doc_id.clone();
    m.version = *version;
    m.section_path = chunk.section_path.clone();
    if m.category.is_none() {
        m.category = defaults.category.clone();
    }
    if m.compliance_level.is_none() {
        m.compliance_level = defaults.compliance_level.clone();
    }
    if m.supplier_tags.is_empty() {
        m.supplier_tags = defaults.supplier_tags.clone();
    }
    let year = m.year.or(defaults.year).unwrap_or_else(|| version.year());
    check_year(year)?;
    m.year = Some(year);
    Ok(chunk)
}
