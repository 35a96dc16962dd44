//! Binary snapshot of an [`InvertedIndex`].
//!
//! Layout: `RQLX` magic, version byte, chunk count, then per chunk its id and
//! length, then the term count and per term its postings `(doc, tf)`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::index::{InvertedIndex, Posting};
use crate::codec::{self, SnapshotError};

const MAGIC: &[u8; 4] = b"RQLX";
const VERSION: u8 = 1;
const LIMIT: usize = 1 << 32;

impl InvertedIndex {
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<(), SnapshotError> {
        codec::write_header(&mut w, MAGIC, VERSION)?;
        codec::write_len(&mut w, self.chunk_ids.len())?;
        for (id, len) in self.chunk_ids.iter().zip(&self.doc_lengths) {
            codec::write_str(&mut w, id)?;
            w.write_u32::<LittleEndian>(*len)?;
        }
        codec::write_len(&mut w, self.postings.len())?;
        for (term, list) in &self.postings {
            codec::write_str(&mut w, term)?;
            codec::write_len(&mut w, list.len())?;
            for p in list {
                w.write_u32::<LittleEndian>(p.doc)?;
                w.write_u32::<LittleEndian>(p.tf)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self, SnapshotError> {
        codec::read_header(&mut r, MAGIC, VERSION)?;
        let n = codec::read_len(&mut r, LIMIT)?;
        let mut chunk_ids = Vec::with_capacity(n.min(1 << 20));
        let mut doc_lengths = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            chunk_ids.push(codec::read_str(&mut r)?);
            doc_lengths.push(r.read_u32::<LittleEndian>()?);
        }
        if chunk_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SnapshotError::Corrupt("chunk ids not strictly sorted".into()));
        }
        let terms = codec::read_len(&mut r, LIMIT)?;
        let mut postings = BTreeMap::new();
        for _ in 0..terms {
            let term = codec::read_str(&mut r)?;
            let len = codec::read_len(&mut r, n)?;
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let doc = r.read_u32::<LittleEndian>()?;
                let tf = r.read_u32::<LittleEndian>()?;
                if doc as usize >= n {
                    return Err(SnapshotError::Corrupt(format!("posting references doc {doc}")));
                }
                list.push(Posting { doc, tf });
            }
            postings.insert(term, list);
        }
        let avg_doc_length = if n == 0 {
            0.0
        } else {
            doc_lengths.iter().map(|&l| l as f64).sum::<f64>() / n as f64
        };
        Ok(Self { chunk_ids, doc_lengths, postings, avg_doc_length })
    }
}
