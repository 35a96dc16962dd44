//! Corpus JSONL records.
//!
//! One document per line:
//!
//! ```text
//! {"doc_id":"MBN-9666-1","version_timestamp":"2015-06-01","title":"...","source_tag":"pdf-scan-2015",
//!  "blocks":[{"kind":"heading","level":1,"text":"Scope"},{"kind":"paragraph","text":"..."}],
//!  "metadata":{"category":"IT Security","compliance_level":"mandatory","supplier_tags":["S-07"],"year":2015}}
//! ```

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use chrono::NaiveDate;
use serde_json::{Map, Value};

use super::{check_year, Block, BlockKind, Document, IngestError, MetadataDefaults};

/// A per-line failure while reading a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {error}")]
pub struct RecordError {
    pub line: usize,
    pub doc_id: Option<String>,
    pub error: IngestError,
}

pub fn parse_structured_document(raw: &str) -> Result<Document, IngestError> {
    let value: Value =
        serde_json::from_str(raw).map_err(|e| IngestError::Malformed(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(IngestError::Malformed("record is not a JSON object".into()));
    };

    let doc_id = required_str(&obj, "doc_id")?;
    if doc_id.trim().is_empty() {
        return Err(invalid("doc_id", "must be non-empty"));
    }
    let version_raw = required_str(&obj, "version_timestamp")?;
    let version_timestamp = parse_date(&version_raw)
        .ok_or_else(|| invalid("version_timestamp", &format!("{version_raw:?} is not an ISO-8601 date")))?;
    let title = optional_str(&obj, "title")?.unwrap_or_default();
    let source_tag = optional_str(&obj, "source_tag")?.unwrap_or_default();

    let blocks = match obj.get("blocks") {
        None | Some(Value::Null) => return Err(IngestError::MissingField("blocks")),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, b)| parse_block(i, b))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(invalid("blocks", "must be an array")),
    };

    let metadata = match obj.get("metadata") {
        None | Some(Value::Null) => MetadataDefaults::default(),
        Some(Value::Object(m)) => parse_metadata(m)?,
        Some(_) => return Err(invalid("metadata", "must be an object")),
    };

    Ok(Document { doc_id, version_timestamp, title, source_tag, blocks, metadata })
}

/// Parse every line of a corpus file. Blank lines are skipped; doc_ids must be
/// unique across the file (later duplicates are reported as errors).
pub fn parse_corpus<R: BufRead>(reader: R) -> std::io::Result<Vec<Result<Document, RecordError>>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let parsed = parse_structured_document(&line).and_then(|doc| {
            if seen.insert(doc.doc_id.clone()) {
                Ok(doc)
            } else {
                Err(IngestError::DuplicateDocument(doc.doc_id))
            }
        });
        out.push(parsed.map_err(|error| RecordError {
            line: lineno,
            doc_id: peek_doc_id(&line),
            error,
        }));
    }
    Ok(out)
}

fn peek_doc_id(line: &str) -> Option<String> {
    serde_json::from_str::<Value>(line)
        .ok()?
        .get("doc_id")?
        .as_str()
        .map(str::to_string)
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .or_else(|| chrono::DateTime::parse_from_rfc3339(s).ok().map(|d| d.date_naive()))
        .or_else(|| {
            chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
                .ok()
                .map(|d| d.date())
        })
}

fn parse_block(index: usize, value: &Value) -> Result<Block, IngestError> {
    let bad = |message: &str| IngestError::InvalidBlock { block: index, message: message.into() };
    let obj = value.as_object().ok_or_else(|| bad("block is not an object"))?;
    let kind = match obj.get("kind") {
        Some(Value::String(k)) => k.as_str(),
        Some(_) => return Err(bad("`kind` must be a string")),
        None => return Err(bad("missing `kind`")),
    };
    let text = match obj.get("text") {
        Some(Value::String(t)) => t.clone(),
        Some(_) => return Err(bad("`text` must be a string")),
        None => return Err(bad("missing `text`")),
    };
    if !text.chars().any(char::is_alphanumeric) {
        return Err(bad("empty text"));
    }
    let kind = match kind {
        "heading" => {
            let level = obj
                .get("level")
                .and_then(Value::as_i64)
                .ok_or_else(|| bad("heading requires an integer `level`"))?;
            if !(1..=6).contains(&level) {
                return Err(bad(&format!("heading level {level} outside 1..=6")));
            }
            BlockKind::Heading { level: level as u8 }
        }
        "paragraph" => BlockKind::Paragraph,
        "table_row" => BlockKind::TableRow,
        other => {
            return Err(IngestError::UnknownBlockKind { block: index, kind: other.to_string() })
        }
    };
    Ok(Block { kind, text })
}

fn parse_metadata(m: &Map<String, Value>) -> Result<MetadataDefaults, IngestError> {
    let category = optional_str(m, "category").map_err(|e| prefix(e, "metadata"))?;
    let compliance_level = optional_str(m, "compliance_level").map_err(|e| prefix(e, "metadata"))?;
    let supplier_tags = match m.get("supplier_tags") {
        None | Some(Value::Null) => BTreeSet::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| invalid("metadata.supplier_tags", "entries must be strings"))
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(invalid("metadata.supplier_tags", "must be an array")),
    };
    let year = match m.get("year") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let y = v
                .as_i64()
                .ok_or_else(|| invalid("metadata.year", "must be an integer"))?;
            let y = i32::try_from(y).map_err(|_| invalid("metadata.year", "out of range"))?;
            check_year(y)?;
            Some(y)
        }
    };
    Ok(MetadataDefaults { category, compliance_level, supplier_tags, year })
}

fn required_str(obj: &Map<String, Value>, field: &'static str) -> Result<String, IngestError> {
    optional_str(obj, field)?.ok_or(IngestError::MissingField(field))
}

fn optional_str(obj: &Map<String, Value>, field: &str) -> Result<Option<String>, IngestError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(invalid(field, "must be a string")),
    }
}

fn invalid(field: &str, message: &str) -> IngestError {
    IngestError::InvalidField { field: field.to_string(), message: message.to_string() }
}

fn prefix(e: IngestError, parent: &str) -> IngestError {
    match e {
        IngestError::InvalidField { field, message } => {
            IngestError::InvalidField { field: format!("{parent}.{field}"), message }
        }
        other => other,
    }
}
