//! Deterministic synthetic corpora for benchmarks and demos.
//!
//! The paraphrase benchmark mixes two query populations over the same chunks.
//! Exact queries name a requirement code plus one technical term, which only a
//! lexical matcher can pin down. Paraphrase queries use everyday synonyms of
//! a chunk's three technical terms and share no surface token with it, so only
//! a retriever that knows the synonym lexicon can find them.

use std::collections::{BTreeSet, HashMap};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::Qrels;
use crate::ingest::{enrich_metadata, Block, Chunk, Chunker, ChunkingConfig, Document, MetadataDefaults, MetadataRegistry};
use crate::lexical::Analyzer;

/// Technical term and an everyday paraphrase of it.
pub const CONCEPTS: [(&str, &str); 48] = [
    ("actuator", "mover"),
    ("bearing", "roller"),
    ("bracket", "holder"),
    ("bushing", "sleeve"),
    ("capacitor", "condenser"),
    ("chassis", "frame"),
    ("clamp", "grip"),
    ("coolant", "antifreeze"),
    ("coupling", "joiner"),
    ("damper", "absorber"),
    ("diode", "semiconductor"),
    ("enclosure", "housing"),
    ("fastener", "screw"),
    ("filament", "strand"),
    ("flange", "rim"),
    ("fuse", "breaker"),
    ("gasket", "packing"),
    ("gearbox", "transmission"),
    ("grommet", "eyelet"),
    ("harness", "loom"),
    ("hinge", "pivot"),
    ("impeller", "vane"),
    ("inverter", "converter"),
    ("latch", "catch"),
    ("lubricant", "grease"),
    ("manifold", "plenum"),
    ("nozzle", "spout"),
    ("piston", "plunger"),
    ("pulley", "sheave"),
    ("radiator", "cooler"),
    ("rectifier", "charger"),
    ("regulator", "governor"),
    ("relay", "contactor"),
    ("resistor", "dropper"),
    ("rivet", "pin"),
    ("rotor", "spinner"),
    ("sensor", "probe"),
    ("shaft", "axle"),
    ("solenoid", "coil"),
    ("spindle", "arbor"),
    ("sprocket", "cog"),
    ("stator", "winding"),
    ("switch", "toggle"),
    ("thermostat", "thermoswitch"),
    ("throttle", "accelerator"),
    ("transformer", "stepdown"),
    ("turbine", "fan"),
    ("washer", "shim"),
];

const SECTIONS: [&str; 5] = ["Scope", "Interfaces", "Performance", "Environment", "Verification"];
const CATEGORIES: [&str; 4] = ["Electrical", "Mechanical", "Thermal", "IT Security"];

/// Concept key shared by a term and its paraphrase.
pub fn concept_key(i: usize) -> String {
    format!("concept{i:02}")
}

/// Class key every requirement code folds to in the dense lexicon.
pub const CODE_CLASS: &str = "reqcode";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Exact,
    Paraphrase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkQuery {
    pub query_id: String,
    pub text: String,
    pub kind: QueryKind,
    pub target: String,
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub documents: Vec<Document>,
    pub chunks: Vec<Chunk>,
    pub queries: Vec<BenchmarkQuery>,
    pub qrels: Qrels,
    codes: Vec<String>,
}

impl Benchmark {
    /// Term and paraphrase both fold to the concept key.
    pub fn synonym_lexicon(&self) -> HashMap<String, String> {
        CONCEPTS
            .iter()
            .enumerate()
            .flat_map(|(i, (t, p))| [(t.to_string(), concept_key(i)), (p.to_string(), concept_key(i))])
            .collect()
    }

    /// Synonym lexicon plus every requirement code folded to one class key.
    /// An embedding built on it knows the vocabulary but cannot tell codes
    /// apart.
    pub fn dense_lexicon(&self) -> HashMap<String, String> {
        let mut lex = self.synonym_lexicon();
        lex.extend(self.codes.iter().map(|c| (c.clone(), CODE_CLASS.to_string())));
        lex
    }

    pub fn queries_of(&self, kind: QueryKind) -> impl Iterator<Item = &BenchmarkQuery> {
        self.queries.iter().filter(move |q| q.kind == kind)
    }
}

fn section_text(code: &str, triple: [usize; 3]) -> String {
    let [a, b, c] = triple.map(|i| CONCEPTS[i].0);
    format!("Requirement {code}: the {a} shall meet the {b} limit during {c} operation.")
}

fn make_documents(n_docs: usize, rng: &mut ChaCha8Rng) -> (Vec<Document>, Vec<(String, [usize; 3])>) {
    let total = n_docs * SECTIONS.len();
    let mut used = BTreeSet::new();
    let mut code_numbers: Vec<u32> = (1000..10000).collect();
    code_numbers.shuffle(rng);
    let mut sections = Vec::with_capacity(total);
    let mut docs = Vec::with_capacity(n_docs);
    for d in 0..n_docs {
        let mut blocks = Vec::new();
        for heading in SECTIONS {
            // the concept triple is unique across the corpus while the space allows it
            let triple = loop {
                let mut t = [0usize; 3];
                let picked = rand::seq::index::sample(rng, CONCEPTS.len(), 3);
                for (slot, i) in t.iter_mut().zip(picked.iter()) {
                    *slot = i;
                }
                let mut key = t;
                key.sort_unstable();
                if used.insert(key) || used.len() >= 17_296 {
                    break t;
                }
            };
            let code = format!("k{}", code_numbers[sections.len() % code_numbers.len()]);
            blocks.push(Block::heading(1, heading));
            blocks.push(Block::paragraph(section_text(&code, triple)));
            sections.push((code, triple));
        }
        let year = 2015 + (d % 10) as i32;
        docs.push(Document {
            doc_id: format!("SYN-{d:04}"),
            version_timestamp: NaiveDate::from_ymd_opt(year, 1 + (d % 12) as u32, 1).expect("valid date"),
            title: format!("Synthetic component specification {d}"),
            source_tag: "synthetic".into(),
            blocks,
            metadata: MetadataDefaults {
                category: Some(CATEGORIES[d % CATEGORIES.len()].to_string()),
                compliance_level: Some(if d % 3 == 0 { "recommended" } else { "mandatory" }.to_string()),
                supplier_tags: BTreeSet::new(),
                year: Some(year),
            },
        });
    }
    (docs, sections)
}

/// Chunk and enrich documents with the given analyzer.
pub fn chunk_documents(docs: &[Document], analyzer: &Analyzer) -> Vec<Chunk> {
    let chunker = Chunker::new(ChunkingConfig::default(), analyzer.clone()).expect("default chunking config is valid");
    let registry = MetadataRegistry::from_documents(docs);
    docs.iter()
        .flat_map(|d| chunker.chunk(d))
        .map(|c| enrich_metadata(c, &registry).expect("document is registered"))
        .collect()
}

/// `n_docs` documents of five one-paragraph sections each, 20 exact and 20
/// paraphrase queries, one relevant chunk (grade 4) per query.
pub fn paraphrase_benchmark(n_docs: usize, seed: u64, analyzer: &Analyzer) -> Benchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (documents, sections) = make_documents(n_docs, &mut rng);
    let chunks = chunk_documents(&documents, analyzer);
    assert_eq!(chunks.len(), sections.len(), "one chunk per section");

    let mut order: Vec<usize> = (0..chunks.len()).collect();
    order.shuffle(&mut rng);
    let n_each = 20.min(order.len() / 2);
    let mut queries = Vec::with_capacity(2 * n_each);
    let mut qrels = Qrels::default();
    for (n, &i) in order.iter().take(2 * n_each).enumerate() {
        let (code, triple) = &sections[i];
        let (kind, text) = if n < n_each {
            let term = CONCEPTS[triple[rng.random_range(0..3)]].0;
            (QueryKind::Exact, format!("{code} {term}"))
        } else {
            let mut words: Vec<&str> = triple.iter().map(|&c| CONCEPTS[c].1).collect();
            words.shuffle(&mut rng);
            (QueryKind::Paraphrase, format!("which {} {} {}", words[0], words[1], words[2]))
        };
        let query_id = format!("q{:02}", n + 1);
        qrels.insert(&query_id, &chunks[i].chunk_id, 4);
        queries.push(BenchmarkQuery { query_id, text, kind, target: chunks[i].chunk_id.clone() });
    }
    Benchmark { documents, chunks, queries, qrels, codes: sections.into_iter().map(|s| s.0).collect() }
}

/// A larger corpus of the same shape for timing: `n_chunks` rounded up to a
/// multiple of five.
pub fn scale_corpus(n_chunks: usize, seed: u64, analyzer: &Analyzer) -> Vec<Chunk> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (docs, _) = make_documents(n_chunks.div_ceil(SECTIONS.len()), &mut rng);
    chunk_documents(&docs, analyzer)
}

/// Corpus records as JSONL, one document per line.
pub fn documents_jsonl(docs: &[Document]) -> String {
    docs.iter()
        .map(|d| serde_json::to_string(d).expect("document serialises") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_structured_document;

    fn analyzer() -> Analyzer {
        Analyzer::default()
    }

    #[test]
    fn vocabulary_is_distinct() {
        let mut words = BTreeSet::new();
        for (t, p) in CONCEPTS {
            assert!(words.insert(t), "{t}");
            assert!(words.insert(p), "{p}");
        }
        for filler in ["requirement", "the", "shall", "meet", "limit", "during", "operation", "which"] {
            assert!(!words.contains(filler));
        }
    }

    #[test]
    fn benchmark_shape() {
        let b = paraphrase_benchmark(50, 7, &analyzer());
        assert_eq!(b.chunks.len(), 250);
        assert_eq!(b.queries.len(), 40);
        assert_eq!(b.queries_of(QueryKind::Exact).count(), 20);
        let targets: BTreeSet<_> = b.queries.iter().map(|q| &q.target).collect();
        assert_eq!(targets.len(), 40);
        for q in &b.queries {
            assert_eq!(b.qrels.grade(&q.query_id, &q.target), Some(4));
        }
    }

    #[test]
    fn paraphrase_queries_share_no_token_with_target() {
        let a = analyzer();
        let b = paraphrase_benchmark(50, 7, &a);
        for q in b.queries_of(QueryKind::Paraphrase) {
            let target = b.chunks.iter().find(|c| c.chunk_id == q.target).unwrap();
            let chunk_tokens: BTreeSet<_> = a.tokenize(&target.text).into_iter().collect();
            assert!(a.tokenize(&q.text).iter().all(|t| !chunk_tokens.contains(t)), "{}", q.text);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = paraphrase_benchmark(10, 3, &analyzer());
        let b = paraphrase_benchmark(10, 3, &analyzer());
        assert_eq!(a.queries, b.queries);
        assert_eq!(a.chunks, b.chunks);
    }

    #[test]
    fn jsonl_round_trips_through_the_record_parser() {
        let b = paraphrase_benchmark(3, 1, &analyzer());
        let text = documents_jsonl(&b.documents);
        for (line, doc) in text.lines().zip(&b.documents) {
            assert_eq!(&parse_structured_document(line).unwrap(), doc);
        }
    }
}
