use serde::Serialize;

use super::ProvenanceRecord;
use crate::ingest::ChunkStore;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum AttributionIssue {
    MissingChunk,
    Mismatch { field: &'static str, recorded: String, current: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributionFailure {
    pub index: usize,
    pub chunk_id: String,
    pub issue: AttributionIssue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub record_id: String,
    pub checked: usize,
    pub failures: Vec<AttributionFailure>,
}

impl VerificationReport {
    pub fn is_verified(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check every attribution against the current corpus: the chunk must exist
/// and its doc id, version, section path and block range must match.
pub fn verify_record(record: &ProvenanceRecord, corpus: &ChunkStore) -> VerificationReport {
    let mut failures = Vec::new();
    for (index, a) in record.attributions.iter().enumerate() {
        let fail = |issue| AttributionFailure { index, chunk_id: a.chunk_id.clone(), issue };
        let Some(chunk) = corpus.get(&a.chunk_id) else {
            failures.push(fail(AttributionIssue::MissingChunk));
            continue;
        };
        let checks: [(&'static str, String, String); 4] = [
            ("doc_id", a.doc_id.clone(), chunk.doc_id.clone()),
            ("version_timestamp", a.version_timestamp.to_string(), chunk.metadata.version.to_string()),
            ("section_path", a.section_path.join(" > "), chunk.section_path.join(" > ")),
            (
                "block_range",
                format!("{}..{}", a.block_range.start, a.block_range.end),
                format!("{}..{}", chunk.block_range.start, chunk.block_range.end),
            ),
        ];
        for (field, recorded, current) in checks {
            if recorded != current {
                failures.push(fail(AttributionIssue::Mismatch { field, recorded, current }));
            }
        }
    }
    VerificationReport { record_id: record.record_id.clone(), checked: record.attributions.len(), failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provenance::tests::{corpus, record};

    fn rec() -> ProvenanceRecord {
        record(&["SPEC-1#0000", "SPEC-1#0001", "SPEC-1#0002"], "a")
    }

    #[test]
    fn unchanged_corpus_verifies() {
        let r = verify_record(&rec(), &corpus());
        assert!(r.is_verified());
        assert_eq!(r.checked, 3);
    }

    #[test]
    fn removed_chunk_reported_alone() {
        let mut c = corpus();
        c.remove("SPEC-1#0001");
        let r = verify_record(&rec(), &c);
        assert_eq!(
            r.failures,
            [AttributionFailure { index: 1, chunk_id: "SPEC-1#0001".into(), issue: AttributionIssue::MissingChunk }]
        );
    }

    #[test]
    fn tampered_path_shows_both_values() {
        let mut r = rec();
        r.attributions[2].section_path = vec!["Network".into(), "Router".into()];
        let rep = verify_record(&r, &corpus());
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(
            rep.failures[0].issue,
            AttributionIssue::Mismatch {
                field: "section_path",
                recorded: "Network > Router".into(),
                current: "Network > Firewall".into()
            }
        );
    }
}
