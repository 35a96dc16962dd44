//! Hierarchical navigable small-world graph.
//!
//! - Levels are drawn from a geometric distribution with scale `1/ln(M)`,
//!   using a ChaCha stream per insertion index so construction is
//!   reproducible from `(seed, insertion order)` alone.
//! - Neighbours are chosen with the diversity heuristic: a candidate is kept
//!   only if it is closer to the new node than to every neighbour already
//!   kept.
//! - Layer 0 holds at most `2M` links per node, upper layers `M`.
//!
//! Construction needs `&mut self`; searches take `&self`, so a built graph can
//! be shared behind an `Arc` for concurrent queries.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingVector;

#[derive(Debug, Error, PartialEq)]
pub enum VectorIndexError {
    #[error("id {0:?} already present")]
    DuplicateId(String),
    #[error("invalid HNSW parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HnswParams {
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
    /// Level multiplier; `None` means `1/ln(M)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_level_scale: Option<f64>,
    pub seed: u64,
}

impl Default for HnswParams {
    fn default() -> Self {
        Self { m: 16, ef_construction: 200, ef_search: 100, max_level_scale: None, seed: 0x5eed }
    }
}

impl HnswParams {
    pub fn validate(&self) -> Result<(), VectorIndexError> {
        if self.m < 2 {
            return Err(VectorIndexError::InvalidParams(format!("M={} < 2", self.m)));
        }
        if self.ef_construction < self.m {
            return Err(VectorIndexError::InvalidParams(format!(
                "ef_construction={} < M={}",
                self.ef_construction, self.m
            )));
        }
        if self.ef_search == 0 {
            return Err(VectorIndexError::InvalidParams("ef_search must be >= 1".into()));
        }
        if let Some(s) = self.max_level_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(VectorIndexError::InvalidParams(format!("level scale {s}")));
            }
        }
        Ok(())
    }

    pub fn level_scale(&self) -> f64 {
        self.max_level_scale.unwrap_or(1.0 / (self.m as f64).ln())
    }

    pub fn max_degree(&self, layer: usize) -> usize {
        if layer == 0 {
            2 * self.m
        } else {
            self.m
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Node {
    pub(crate) id: String,
    pub(crate) vector: EmbeddingVector,
    /// `links[layer]` for `layer` in `0..=level`.
    pub(crate) links: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HnswGraph {
    pub(crate) params: HnswParams,
    pub(crate) nodes: Vec<Node>,
    pub(crate) lookup: HashMap<String, u32>,
    pub(crate) entry_point: Option<u32>,
    pub(crate) top_layer: usize,
}

/// Distance with a deterministic tie-break on node index.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    dist: f32,
    node: u32,
}

impl Eq for Scored {}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl HnswGraph {
    pub fn new(params: HnswParams) -> Result<Self, VectorIndexError> {
        params.validate()?;
        Ok(Self { params, nodes: Vec::new(), lookup: HashMap::new(), entry_point: None, top_layer: 0 })
    }

    pub fn params(&self) -> &HnswParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn entry_point(&self) -> Option<&str> {
        self.entry_point.map(|e| self.nodes[e as usize].id.as_str())
    }

    pub fn top_layer(&self) -> usize {
        self.top_layer
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    pub fn vector(&self, id: &str) -> Option<&EmbeddingVector> {
        self.lookup.get(id).map(|&i| &self.nodes[i as usize].vector)
    }

    /// Neighbour ids of `id` at `layer`.
    pub fn neighbors(&self, id: &str, layer: usize) -> Option<Vec<&str>> {
        let node = &self.nodes[*self.lookup.get(id)? as usize];
        let links = node.links.get(layer)?;
        Some(links.iter().map(|&n| self.nodes[n as usize].id.as_str()).collect())
    }

    /// Highest layer of a node.
    pub fn level_of(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).map(|&i| self.nodes[i as usize].links.len() - 1)
    }

    fn sample_level(&self, index: usize) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        rng.set_stream(index as u64);
        let u: f64 = rng.random();
        (-(1.0 - u).ln() * self.params.level_scale()).floor() as usize
    }

    #[inline]
    fn dist_to(&self, query: &EmbeddingVector, node: u32) -> f32 {
        1.0 - query.dot(&self.nodes[node as usize].vector)
    }

    #[inline]
    fn dist_between(&self, a: u32, b: u32) -> f32 {
        1.0 - self.nodes[a as usize].vector.dot(&self.nodes[b as usize].vector)
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: EmbeddingVector) -> Result<(), VectorIndexError> {
        let id = id.into();
        if self.lookup.contains_key(&id) {
            return Err(VectorIndexError::DuplicateId(id));
        }
        let index = self.nodes.len() as u32;
        let level = self.sample_level(index as usize);
        self.lookup.insert(id.clone(), index);
        self.nodes.push(Node { id, vector, links: vec![Vec::new(); level + 1] });

        let Some(entry) = self.entry_point else {
            self.entry_point = Some(index);
            self.top_layer = level;
            return Ok(());
        };

        let query = self.nodes[index as usize].vector.clone();
        let mut eps = vec![Scored { dist: self.dist_to(&query, entry), node: entry }];
        for layer in (level + 1..=self.top_layer).rev() {
            eps = self.search_layer(&query, &eps, 1, layer);
        }
        for layer in (0..=level.min(self.top_layer)).rev() {
            let found = self.search_layer(&query, &eps, self.params.ef_construction, layer);
            let selected = self.select_neighbors(&found, self.params.m);
            self.nodes[index as usize].links[layer] = selected.iter().map(|s| s.node).collect();
            for s in &selected {
                self.connect(s.node, index, layer);
            }
            eps = found;
        }
        if level > self.top_layer {
            self.top_layer = level;
            self.entry_point = Some(index);
        }
        Ok(())
    }

    /// Add `new` to `target`'s links at `layer`, pruning back to the degree cap.
    fn connect(&mut self, target: u32, new: u32, layer: usize) {
        let cap = self.params.max_degree(layer);
        let links = &mut self.nodes[target as usize].links[layer];
        links.push(new);
        if links.len() <= cap {
            return;
        }
        let mut candidates: Vec<Scored> = self.nodes[target as usize].links[layer]
            .iter()
            .map(|&n| Scored { dist: self.dist_between(target, n), node: n })
            .collect();
        candidates.sort();
        let kept = self.select_neighbors(&candidates, cap);
        self.nodes[target as usize].links[layer] = kept.into_iter().map(|s| s.node).collect();
    }

    /// Diversity heuristic over candidates sorted by ascending distance to the
    /// base node.
    fn select_neighbors(&self, candidates: &[Scored], m: usize) -> Vec<Scored> {
        let mut selected: Vec<Scored> = Vec::with_capacity(m);
        for &c in candidates {
            if selected.len() >= m {
                break;
            }
            if selected.iter().all(|s| self.dist_between(c.node, s.node) > c.dist) {
                selected.push(c);
            }
        }
        selected
    }

    /// Beam search on one layer; returns up to `ef` nodes sorted by distance.
    fn search_layer(&self, query: &EmbeddingVector, entry: &[Scored], ef: usize, layer: usize) -> Vec<Scored> {
        let mut visited = vec![false; self.nodes.len()];
        let mut candidates: BinaryHeap<Reverse<Scored>> = BinaryHeap::new();
        let mut best: BinaryHeap<Scored> = BinaryHeap::new();
        for &e in entry {
            if !visited[e.node as usize] {
                visited[e.node as usize] = true;
                candidates.push(Reverse(e));
                best.push(e);
            }
        }
        while best.len() > ef {
            best.pop();
        }
        while let Some(Reverse(current)) = candidates.pop() {
            let worst = best.peek().map_or(f32::INFINITY, |w| w.dist);
            if current.dist > worst && best.len() >= ef {
                break;
            }
            let Some(links) = self.nodes[current.node as usize].links.get(layer) else { continue };
            for &n in links {
                if visited[n as usize] {
                    continue;
                }
                visited[n as usize] = true;
                let s = Scored { dist: self.dist_to(query, n), node: n };
                if best.len() < ef || s < *best.peek().expect("non-empty") {
                    candidates.push(Reverse(s));
                    best.push(s);
                    if best.len() > ef {
                        best.pop();
                    }
                }
            }
        }
        best.into_sorted_vec()
    }

    /// Approximate top-`k` by cosine similarity, descending, ties by id.
    ///
    /// The beam width is `max(ef_search, k)`. When that covers the whole graph
    /// the scan is exhaustive, so `k >= len()` always returns every id.
    pub fn search_knn(&self, query: &EmbeddingVector, k: usize) -> Vec<(String, f64)> {
        self.search_knn_ef(query, k, self.params.ef_search)
    }

    pub fn search_knn_ef(&self, query: &EmbeddingVector, k: usize, ef_search: usize) -> Vec<(String, f64)> {
        let Some(entry) = self.entry_point else { return Vec::new() };
        if k == 0 {
            return Vec::new();
        }
        let ef = ef_search.max(k);
        let found: Vec<u32> = if ef >= self.nodes.len() {
            (0..self.nodes.len() as u32).collect()
        } else {
            let mut eps = vec![Scored { dist: self.dist_to(query, entry), node: entry }];
            for layer in (1..=self.top_layer).rev() {
                eps = self.search_layer(query, &eps, 1, layer);
            }
            self.search_layer(query, &eps, ef, 0).into_iter().map(|s| s.node).collect()
        };
        let mut hits: Vec<(String, f64)> = found
            .into_iter()
            .map(|n| {
                let node = &self.nodes[n as usize];
                (node.id.clone(), query.cosine(&node.vector))
            })
            .collect();
        sort_hits(&mut hits);
        hits.truncate(k);
        hits
    }

    /// Ids not reachable from the entry point over layer-0 links.
    pub fn unreachable_from_entry(&self) -> Vec<&str> {
        let Some(entry) = self.entry_point else { return Vec::new() };
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([entry]);
        seen[entry as usize] = true;
        while let Some(n) = queue.pop_front() {
            for &m in &self.nodes[n as usize].links[0] {
                if !seen[m as usize] {
                    seen[m as usize] = true;
                    queue.push_back(m);
                }
            }
        }
        self.nodes
            .iter()
            .zip(&seen)
            .filter(|(_, &s)| !s)
            .map(|(n, _)| n.id.as_str())
            .collect()
    }
}

/// Similarity descending, then id ascending.
pub(crate) fn sort_hits(hits: &mut [(String, f64)]) {
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::embedding::EMBEDDING_DIM;
    use rand_distr::{Distribution, StandardNormal};

    pub(crate) fn random_unit(rng: &mut ChaCha8Rng) -> EmbeddingVector {
        let v: Vec<f32> = (0..EMBEDDING_DIM).map(|_| StandardNormal.sample(rng)).collect();
        EmbeddingVector::normalize(v).unwrap()
    }

    #[test]
    fn first_insert_becomes_entry() {
        let mut g = HnswGraph::new(HnswParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        g.insert("a", random_unit(&mut rng)).unwrap();
        assert_eq!(g.entry_point(), Some("a"));
        assert_eq!(g.top_layer(), g.level_of("a").unwrap());
    }

    #[test]
    fn two_nodes_link_each_other() {
        let mut g = HnswGraph::new(HnswParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        g.insert("a", random_unit(&mut rng)).unwrap();
        g.insert("b", random_unit(&mut rng)).unwrap();
        assert_eq!(g.neighbors("a", 0).unwrap(), vec!["b"]);
        assert_eq!(g.neighbors("b", 0).unwrap(), vec!["a"]);
    }

    #[test]
    fn duplicate_rejected() {
        let mut g = HnswGraph::new(HnswParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        g.insert("a", random_unit(&mut rng)).unwrap();
        assert_eq!(
            g.insert("a", random_unit(&mut rng)),
            Err(VectorIndexError::DuplicateId("a".into()))
        );
    }

    #[test]
    fn params_validation() {
        assert!(HnswParams { m: 1, ..Default::default() }.validate().is_err());
        assert!(HnswParams { ef_construction: 8, ..Default::default() }.validate().is_err());
        assert!(HnswParams { ef_search: 0, ..Default::default() }.validate().is_err());
        assert!((HnswParams::default().level_scale() - 1.0 / 16f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_graph_search() {
        let g = HnswGraph::new(HnswParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(g.search_knn(&random_unit(&mut rng), 5).is_empty());
    }

    fn build(n: usize, seed: u64) -> (HnswGraph, Vec<(String, EmbeddingVector)>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = HnswGraph::new(HnswParams::default()).unwrap();
        let mut items = Vec::new();
        for i in 0..n {
            let v = random_unit(&mut rng);
            let id = format!("n{i:05}");
            g.insert(id.clone(), v.clone()).unwrap();
            items.push((id, v));
        }
        (g, items)
    }

    #[test]
    fn degree_caps_and_reachability_on_1000() {
        let (g, _) = build(1000, 11);
        for node in &g.nodes {
            for (layer, links) in node.links.iter().enumerate() {
                assert!(links.len() <= g.params.max_degree(layer));
                for &l in links {
                    assert!((l as usize) < g.nodes.len());
                    assert!(g.nodes[l as usize].links.len() > layer, "link to node absent from layer");
                }
            }
        }
        assert!(g.unreachable_from_entry().is_empty());
    }

    #[test]
    fn stored_vector_is_its_own_nearest() {
        let (g, items) = build(300, 12);
        for (id, v) in items.iter().step_by(37) {
            let hits = g.search_knn(v, 3);
            assert_eq!(&hits[0].0, id);
            assert!((hits[0].1 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn large_k_returns_everything() {
        let (g, items) = build(50, 13);
        let hits = g.search_knn(&items[0].1, 80);
        assert_eq!(hits.len(), 50);
    }

    #[test]
    fn prefix_property_below_ef() {
        let (g, _) = build(400, 14);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let q = random_unit(&mut rng);
            let full = g.search_knn(&q, 20);
            for k in 1..20 {
                assert_eq!(g.search_knn(&q, k), full[..k].to_vec());
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let (a, _) = build(200, 15);
        let (b, _) = build(200, 15);
        assert_eq!(a, b);
    }
}
