use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};

use super::{ProvenanceError, ProvenanceRecord};

/// Append-only record store backed by a JSONL file (or memory only).
/// Appends are serialised; lookups run concurrently.
#[derive(Debug)]
pub struct ProvenanceStore {
    path: Option<PathBuf>,
    file: Mutex<Option<File>>,
    records: RwLock<(Vec<ProvenanceRecord>, HashMap<String, usize>)>,
}

impl ProvenanceStore {
    pub fn in_memory() -> Self {
        Self { path: None, file: Mutex::new(None), records: RwLock::new((Vec::new(), HashMap::new())) }
    }

    /// Load existing records from `path` (if present) and append new ones to it.
    pub fn open(path: &Path) -> Result<Self, ProvenanceError> {
        let mut records = Vec::new();
        let mut index = HashMap::new();
        if path.exists() {
            for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: ProvenanceRecord = serde_json::from_str(&line)
                    .map_err(|e| ProvenanceError::Corrupt { line: i + 1, message: e.to_string() })?;
                if index.insert(rec.record_id.clone(), records.len()).is_some() {
                    return Err(ProvenanceError::Corrupt {
                        line: i + 1,
                        message: format!("duplicate record id {}", rec.record_id),
                    });
                }
                records.push(rec);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { path: Some(path.to_path_buf()), file: Mutex::new(Some(file)), records: RwLock::new((records, index)) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn append(&self, record: ProvenanceRecord) -> Result<(), ProvenanceError> {
        let mut file = self.file.lock();
        if self.records.read().1.contains_key(&record.record_id) {
            return Err(ProvenanceError::DuplicateRecord(record.record_id));
        }
        if let Some(f) = file.as_mut() {
            let mut line = serde_json::to_vec(&record).map_err(std::io::Error::from)?;
            line.push(b'\n');
            f.write_all(&line)?;
            f.flush()?;
        }
        let mut g = self.records.write();
        let n = g.0.len();
        g.1.insert(record.record_id.clone(), n);
        g.0.push(record);
        Ok(())
    }

    pub fn get(&self, record_id: &str) -> Option<ProvenanceRecord> {
        let g = self.records.read();
        g.1.get(record_id).map(|&i| g.0[i].clone())
    }

    pub fn len(&self) -> usize {
        self.records.read().0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> Vec<ProvenanceRecord> {
        self.records.read().0.clone()
    }
}
