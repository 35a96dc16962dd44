//! Binary snapshot of an [`HnswGraph`].
//!
//! Layout: `RQHN` magic, version byte, parameters, entry point and top layer,
//! then every node in insertion order with its id, vector and per-layer links.
//! Reloading reproduces the graph exactly, including neighbour order.

use std::collections::HashMap;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::hnsw::{HnswGraph, HnswParams, Node};
use crate::codec::{self, SnapshotError};
use crate::embedding::{EmbeddingVector, EMBEDDING_DIM};

const MAGIC: &[u8; 4] = b"RQHN";
const VERSION: u8 = 1;
const NO_ENTRY: u32 = u32::MAX;
const MAX_LAYERS: usize = 64;

impl HnswGraph {
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<(), SnapshotError> {
        codec::write_header(&mut w, MAGIC, VERSION)?;
        let p = &self.params;
        w.write_u32::<LittleEndian>(p.m as u32)?;
        w.write_u32::<LittleEndian>(p.ef_construction as u32)?;
        w.write_u32::<LittleEndian>(p.ef_search as u32)?;
        w.write_f64::<LittleEndian>(p.max_level_scale.unwrap_or(f64::NAN))?;
        w.write_u64::<LittleEndian>(p.seed)?;
        w.write_u32::<LittleEndian>(self.entry_point.unwrap_or(NO_ENTRY))?;
        w.write_u32::<LittleEndian>(self.top_layer as u32)?;
        codec::write_len(&mut w, self.nodes.len())?;
        for node in &self.nodes {
            codec::write_str(&mut w, &node.id)?;
            for &x in node.vector.as_slice() {
                w.write_f32::<LittleEndian>(x)?;
            }
            w.write_u8(node.links.len() as u8)?;
            for layer in &node.links {
                w.write_u32::<LittleEndian>(layer.len() as u32)?;
                for &n in layer {
                    w.write_u32::<LittleEndian>(n)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self, SnapshotError> {
        codec::read_header(&mut r, MAGIC, VERSION)?;
        let m = r.read_u32::<LittleEndian>()? as usize;
        let ef_construction = r.read_u32::<LittleEndian>()? as usize;
        let ef_search = r.read_u32::<LittleEndian>()? as usize;
        let scale = r.read_f64::<LittleEndian>()?;
        let seed = r.read_u64::<LittleEndian>()?;
        let params = HnswParams {
            m,
            ef_construction,
            ef_search,
            max_level_scale: (!scale.is_nan()).then_some(scale),
            seed,
        };
        params.validate().map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
        let entry = r.read_u32::<LittleEndian>()?;
        let top_layer = r.read_u32::<LittleEndian>()? as usize;
        let n = codec::read_len(&mut r, u32::MAX as usize - 1)?;

        let mut nodes = Vec::with_capacity(n.min(1 << 20));
        let mut lookup = HashMap::with_capacity(n.min(1 << 20));
        let mut values = vec![0f32; EMBEDDING_DIM];
        for i in 0..n {
            let id = codec::read_str(&mut r)?;
            r.read_f32_into::<LittleEndian>(&mut values)?;
            let vector = EmbeddingVector::from_unit(values.clone())
                .map_err(|e| SnapshotError::Corrupt(format!("node {id:?}: {e}")))?;
            let layers = r.read_u8()? as usize;
            if layers == 0 || layers > MAX_LAYERS {
                return Err(SnapshotError::Corrupt(format!("node {id:?} has {layers} layers")));
            }
            let mut links = Vec::with_capacity(layers);
            for layer in 0..layers {
                let len = r.read_u32::<LittleEndian>()? as usize;
                if len > params.max_degree(layer) {
                    return Err(SnapshotError::Corrupt(format!("node {id:?} exceeds degree cap")));
                }
                let mut list = Vec::with_capacity(len);
                for _ in 0..len {
                    let t = r.read_u32::<LittleEndian>()?;
                    if t as usize >= n {
                        return Err(SnapshotError::Corrupt(format!("node {id:?} links to {t}")));
                    }
                    list.push(t);
                }
                links.push(list);
            }
            if lookup.insert(id.clone(), i as u32).is_some() {
                return Err(SnapshotError::Corrupt(format!("duplicate id {id:?}")));
            }
            nodes.push(Node { id, vector, links });
        }
        let entry_point = match (entry, n) {
            (NO_ENTRY, 0) => None,
            (e, _) if (e as usize) < n && nodes[e as usize].links.len() == top_layer + 1 => Some(e),
            _ => return Err(SnapshotError::Corrupt("bad entry point".into())),
        };
        for node in &nodes {
            for (layer, list) in node.links.iter().enumerate() {
                if list.iter().any(|&t| nodes[t as usize].links.len() <= layer) {
                    return Err(SnapshotError::Corrupt(format!("node {:?}: dangling link", node.id)));
                }
            }
        }
        Ok(Self { params, nodes, lookup, entry_point, top_layer })
    }
}
