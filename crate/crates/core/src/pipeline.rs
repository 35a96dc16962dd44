//! End-to-end wiring shared by the CLI and the HTTP service: ingest, index
//! build and load, and the query path (retrieve, route, generate, record).

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, EmbeddingKind, ProviderKind, SystemConfig};
use crate::embedding::{EmbeddingProvider, HashedBagProvider, RemoteEmbeddingProvider};
use crate::fusion::{hybrid_search, FusionConfig, FusionError, RetrievalCandidate, SearchContext, StageTimings, TokenOverlapScorer};
use crate::ingest::{
    enrich_metadata, parse_corpus, parse_structured_document, Chunk, ChunkStore, Chunker, IngestFailure, IngestStats,
    MetadataRegistry, TokenDistribution,
};
use crate::lexical::{Analyzer, InvertedIndex};
use crate::money::Money;
use crate::orchestrator::{
    plan, BreakerSnapshot, CostLedger, FeatureExtractor, GenerationProvider, GenerationRequest, HttpGenerationProvider,
    MockProvider, Orchestrator, OrchestratorError, SystemClock,
};
use crate::provenance::{assemble_provenance, AssembleOptions, ProvenanceError, ProvenanceStore};
use crate::vector::HnswGraph;
use crate::SnapshotError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
    #[error("{0}; run `reqrag index` first")]
    MissingIndex(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Generation(#[from] OrchestratorError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
    #[error("snapshot {path}: {source}")]
    Snapshot { path: String, source: SnapshotError },
    #[error("embedding: {0}")]
    Embedding(String),
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> PipelineError {
    let context = context.into();
    move |source| PipelineError::Io { context, source }
}

pub fn analyzer_for(cfg: &SystemConfig) -> Analyzer {
    Analyzer::new(&cfg.dictionary, cfg.tokenizer)
}

pub fn embedder_for(cfg: &SystemConfig, analyzer: &Analyzer) -> Arc<dyn EmbeddingProvider> {
    let e = &cfg.embedding;
    match e.kind {
        EmbeddingKind::Builtin => Arc::new(HashedBagProvider::new(analyzer.clone()).with_lexicon(cfg.lexicon_map())),
        EmbeddingKind::Http => Arc::new(RemoteEmbeddingProvider::new(
            e.provider_id.clone(),
            e.model_id.clone(),
            e.endpoint.clone().unwrap_or_default(),
            e.api_key_env.as_ref().and_then(|v| std::env::var(v).ok()),
            std::time::Duration::from_secs_f64(e.timeout_secs),
        )),
    }
}

/// Mock providers for every id the routing policy mentions, replaced by
/// HTTP providers where the config says so.
pub fn providers_for(cfg: &SystemConfig) -> Vec<Arc<dyn GenerationProvider>> {
    let mut ids = cfg.referenced_providers();
    ids.extend(cfg.providers.keys().cloned());
    ids.sort();
    ids.dedup();
    ids.into_iter()
        .map(|id| -> Arc<dyn GenerationProvider> {
            match cfg.providers.get(&id) {
                Some(p) if p.kind == ProviderKind::Http => Arc::new(HttpGenerationProvider::new(
                    id.clone(),
                    p.model_id.clone().unwrap_or_else(|| id.clone()),
                    p.endpoint.clone().unwrap_or_default(),
                    p.api_key(),
                    p.timeout(),
                )),
                _ => Arc::new(MockProvider::new(id)),
            }
        })
        .collect()
}

/// Parse, chunk and enrich a corpus. Bad records are collected in the stats;
/// only an unreadable stream is an error.
pub fn ingest_corpus<R: BufRead>(reader: R, cfg: &SystemConfig) -> io::Result<(Vec<Chunk>, IngestStats)> {
    let analyzer = analyzer_for(cfg);
    let chunker = Chunker::new(cfg.chunking, analyzer).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    let mut stats = IngestStats::default();
    let mut chunks = Vec::new();
    let mut registry = MetadataRegistry::new();
    let parsed = parse_corpus(reader)?;
    let docs: Vec<_> = parsed
        .into_iter()
        .filter_map(|r| match r {
            Ok(d) => Some(d),
            Err(e) => {
                stats.errors.push(IngestFailure::from(&e));
                None
            }
        })
        .collect();
    for d in &docs {
        registry.insert(&d.doc_id, d.version_timestamp, d.metadata.clone());
    }
    for d in &docs {
        let mut produced = Vec::new();
        let mut failed = None;
        for c in chunker.chunk(d) {
            match enrich_metadata(c, &registry) {
                Ok(c) => produced.push(c),
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        match failed {
            Some(e) => stats.errors.push(IngestFailure { line: 0, doc_id: Some(d.doc_id.clone()), message: e.to_string() }),
            None => {
                stats.documents += 1;
                chunks.extend(produced);
            }
        }
    }
    stats.chunks = chunks.len();
    stats.tokens = TokenDistribution::from_counts(&chunks.iter().map(|c| c.token_count).collect::<Vec<_>>());
    Ok((chunks, stats))
}

/// Chunk one corpus record without touching any index.
pub fn chunk_record(raw: &str, cfg: &SystemConfig) -> Result<Vec<Chunk>, PipelineError> {
    let doc = parse_structured_document(raw).map_err(|e| PipelineError::Input(e.to_string()))?;
    let chunker = Chunker::new(cfg.chunking, analyzer_for(cfg)).map_err(|e| PipelineError::Input(e.to_string()))?;
    let registry = MetadataRegistry::from_documents([&doc]);
    chunker
        .chunk(&doc)
        .into_iter()
        .map(|c| enrich_metadata(c, &registry).map_err(|e| PipelineError::Input(e.to_string())))
        .collect()
}

pub fn build_lexical(store: &ChunkStore, analyzer: &Analyzer) -> Result<InvertedIndex, PipelineError> {
    InvertedIndex::build(store.iter().map(|c| (c.chunk_id.as_str(), c.text.as_str())), analyzer)
        .map_err(|e| PipelineError::Input(e.to_string()))
}

/// Embed every chunk in store order and insert it into a fresh graph.
pub fn build_vectors(
    store: &ChunkStore,
    embedder: &dyn EmbeddingProvider,
    cfg: &SystemConfig,
) -> Result<HnswGraph, PipelineError> {
    let mut graph = HnswGraph::new(cfg.hnsw).map_err(|e| PipelineError::Input(e.to_string()))?;
    let chunks: Vec<&Chunk> = store.iter().collect();
    for batch in chunks.chunks(64) {
        let texts: Vec<&str> = batch.iter().map(|c| c.text.as_str()).collect();
        let vectors = embedder.embed_batch(&texts).map_err(|e| PipelineError::Embedding(e.to_string()))?;
        for (c, v) in batch.iter().zip(vectors) {
            graph.insert(c.chunk_id.clone(), v).map_err(|e| PipelineError::Input(e.to_string()))?;
        }
    }
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexManifest {
    pub chunk_count: usize,
    pub lexical: bool,
    pub vectors: bool,
    pub embedding_provider: String,
    pub embedding_model: String,
    pub built_at: DateTime<Utc>,
}

fn save_snapshot(path: &Path, write: impl FnOnce(&mut io::BufWriter<File>) -> Result<(), SnapshotError>) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    let mut w = io::BufWriter::new(File::create(&tmp).map_err(io_err(format!("creating {}", tmp.display())))?);
    write(&mut w).map_err(|source| PipelineError::Snapshot { path: path.display().to_string(), source })?;
    drop(w);
    fs::rename(&tmp, path).map_err(io_err(format!("writing {}", path.display())))
}

fn load_snapshot<T>(path: &Path, read: impl FnOnce(BufReader<File>) -> Result<T, SnapshotError>) -> Result<T, PipelineError> {
    let f = File::open(path).map_err(io_err(format!("opening {}", path.display())))?;
    read(BufReader::new(f)).map_err(|source| PipelineError::Snapshot { path: path.display().to_string(), source })
}

/// Merge staged ingests into the chunk store, then write both snapshots and
/// the manifest. With `dense_only` the lexical snapshot is skipped.
pub fn build_indexes(cfg: &SystemConfig, dense_only: bool) -> Result<IndexManifest, PipelineError> {
    let paths = &cfg.paths;
    if !paths.chunks().exists() {
        return Err(PipelineError::MissingIndex(format!("no chunk store at {}; run `reqrag ingest`", paths.chunks().display())));
    }
    let mut store = ChunkStore::load(&paths.chunks()).map_err(io_err("loading chunk store"))?;
    let pending = paths.pending();
    if pending.exists() {
        let staged = ChunkStore::load(&pending).map_err(io_err("loading staged chunks"))?;
        for c in staged.iter() {
            store.insert(c.clone()).map_err(|e| PipelineError::Input(e.to_string()))?;
        }
        store.save(&paths.chunks()).map_err(io_err("saving chunk store"))?;
        fs::remove_file(&pending).map_err(io_err("clearing staged chunks"))?;
    }
    if store.is_empty() {
        return Err(PipelineError::Input("chunk store is empty; nothing to index".into()));
    }
    let analyzer = analyzer_for(cfg);
    let embedder = embedder_for(cfg, &analyzer);
    if dense_only {
        let _ = fs::remove_file(paths.lexical_snapshot());
    } else {
        let lexical = build_lexical(&store, &analyzer)?;
        save_snapshot(&paths.lexical_snapshot(), |w| lexical.write_snapshot(w))?;
    }
    let graph = build_vectors(&store, embedder.as_ref(), cfg)?;
    save_snapshot(&paths.vector_snapshot(), |w| graph.write_snapshot(w))?;
    let d = embedder.descriptor();
    let manifest = IndexManifest {
        chunk_count: store.len(),
        lexical: !dense_only,
        vectors: true,
        embedding_provider: d.provider_id.clone(),
        embedding_model: d.model_id.clone(),
        built_at: Utc::now(),
    };
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
    fs::write(paths.manifest(), json).map_err(io_err("writing manifest"))?;
    Ok(manifest)
}

/// Command-line / request toggles layered over the configured fusion settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryFlags {
    pub no_rerank: bool,
    pub sparse_only: bool,
    pub dense_only: bool,
    pub dry_run: bool,
}

impl QueryFlags {
    pub fn apply(&self, base: &FusionConfig) -> Result<FusionConfig, PipelineError> {
        if self.sparse_only && self.dense_only {
            return Err(PipelineError::Input("--sparse-only and --dense-only are mutually exclusive".into()));
        }
        let mut cfg = base.clone();
        if self.no_rerank {
            cfg.rerank_enabled = false;
        }
        if self.sparse_only {
            cfg.dense_enabled = false;
            cfg.sparse_enabled = true;
        }
        if self.dense_only {
            cfg.sparse_enabled = false;
            cfg.dense_enabled = true;
        }
        Ok(cfg)
    }
}

/// A ranked source with the location it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub rank: usize,
    pub doc_id: String,
    pub section_path: Vec<String>,
    #[serde(flatten)]
    pub candidate: RetrievalCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    pub provider_id: String,
    pub model_id: String,
    pub tier_id: u8,
    pub complexity_score: f64,
    pub attempts: u32,
    pub cost: Money,
    pub provenance_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub query: String,
    pub sources: Vec<Source>,
    pub timings: StageTimings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<Answer>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsSnapshot {
    pub queries_served: u64,
    pub dry_runs: u64,
    pub per_tier: [u64; 3],
    pub ledger_total: Money,
    pub ledger_by_tier: std::collections::BTreeMap<u8, Money>,
    pub breakers: std::collections::BTreeMap<String, BreakerSnapshot>,
    pub chunks: usize,
}

/// Loaded indexes plus the shared mutable state (breakers, ledger,
/// provenance store, counters). Safe to share across threads.
pub struct Pipeline {
    cfg: SystemConfig,
    analyzer: Analyzer,
    chunks: ChunkStore,
    lexical: Option<InvertedIndex>,
    vectors: Option<HnswGraph>,
    embedder: Arc<dyn EmbeddingProvider>,
    scorer: TokenOverlapScorer,
    extractor: FeatureExtractor,
    orchestrator: Orchestrator,
    ledger: CostLedger,
    ledger_file: Mutex<Option<File>>,
    provenance: ProvenanceStore,
    staging: Mutex<()>,
    served: AtomicU64,
    dry_runs: AtomicU64,
    per_tier: [AtomicU64; 3],
}

impl Pipeline {
    /// Load chunks and snapshots from the configured data directory.
    pub fn open(cfg: SystemConfig) -> Result<Self, PipelineError> {
        let paths = cfg.paths.clone();
        let manifest_path = paths.manifest();
        if !manifest_path.exists() {
            return Err(PipelineError::MissingIndex(format!("no index manifest at {}", manifest_path.display())));
        }
        let manifest: IndexManifest = serde_json::from_slice(&fs::read(&manifest_path).map_err(io_err("reading manifest"))?)
            .map_err(|e| PipelineError::Input(format!("manifest: {e}")))?;
        let chunks = ChunkStore::load(&paths.chunks()).map_err(io_err("loading chunk store"))?;
        let lexical = if manifest.lexical {
            Some(load_snapshot(&paths.lexical_snapshot(), InvertedIndex::read_snapshot)?)
        } else {
            None
        };
        let vectors = if manifest.vectors {
            Some(load_snapshot(&paths.vector_snapshot(), HnswGraph::read_snapshot)?)
        } else {
            None
        };
        let provenance = ProvenanceStore::open(&paths.provenance_store())?;
        let ledger_path = paths.ledger_file();
        let ledger_file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&ledger_path)
            .map_err(io_err(format!("opening {}", ledger_path.display())))?;
        let mut p = Self::from_parts(cfg, chunks, lexical, vectors, provenance)?;
        p.ledger_file = Mutex::new(Some(ledger_file));
        Ok(p)
    }

    /// Assemble a pipeline from in-memory parts; nothing is written to disk
    /// unless `provenance` is file backed.
    pub fn from_parts(
        cfg: SystemConfig,
        chunks: ChunkStore,
        lexical: Option<InvertedIndex>,
        vectors: Option<HnswGraph>,
        provenance: ProvenanceStore,
    ) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let analyzer = analyzer_for(&cfg);
        let embedder = embedder_for(&cfg, &analyzer);
        let scorer = TokenOverlapScorer::new(analyzer.clone()).with_lexicon(cfg.lexicon_map());
        let extractor = match &cfg.complexity.reference_patterns {
            Some(p) => FeatureExtractor::with_patterns(analyzer.clone(), p)
                .map_err(|e| PipelineError::Input(e.to_string()))?,
            None => FeatureExtractor::new(analyzer.clone()),
        };
        let orchestrator = Orchestrator::new(providers_for(&cfg), cfg.retry, cfg.breaker, Arc::new(SystemClock::default()))?;
        Ok(Self {
            analyzer,
            chunks,
            lexical,
            vectors,
            embedder,
            scorer,
            extractor,
            orchestrator,
            ledger: CostLedger::new(),
            ledger_file: Mutex::new(None),
            provenance,
            staging: Mutex::new(()),
            served: AtomicU64::new(0),
            dry_runs: AtomicU64::new(0),
            per_tier: Default::default(),
            cfg,
        })
    }

    /// Build both indexes in memory from a chunk store.
    pub fn in_memory(cfg: SystemConfig, chunks: ChunkStore) -> Result<Self, PipelineError> {
        let analyzer = analyzer_for(&cfg);
        let lexical = build_lexical(&chunks, &analyzer)?;
        let vectors = build_vectors(&chunks, embedder_for(&cfg, &analyzer).as_ref(), &cfg)?;
        Self::from_parts(cfg, chunks, Some(lexical), Some(vectors), ProvenanceStore::in_memory())
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn chunks(&self) -> &ChunkStore {
        &self.chunks
    }

    pub fn lexical(&self) -> Option<&InvertedIndex> {
        self.lexical.as_ref()
    }

    pub fn vectors(&self) -> Option<&HnswGraph> {
        self.vectors.as_ref()
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn provenance(&self) -> &ProvenanceStore {
        &self.provenance
    }

    pub fn orchestrator(&self) -> &Orchestrator {
        &self.orchestrator
    }

    /// Fusion config after flags; dense-only builds force sparse off.
    pub fn effective_fusion(&self, flags: &QueryFlags) -> Result<FusionConfig, PipelineError> {
        let mut cfg = flags.apply(&self.cfg.fusion)?;
        if self.lexical.is_none() && cfg.sparse_enabled {
            if flags.sparse_only {
                return Err(PipelineError::MissingIndex("index was built with --dense-only; no lexical index".into()));
            }
            cfg.sparse_enabled = false;
            cfg.dense_enabled = true;
        }
        Ok(cfg)
    }

    pub fn retrieve(&self, query: &str, fusion: &FusionConfig) -> Result<(Vec<RetrievalCandidate>, StageTimings), PipelineError> {
        let ctx = SearchContext {
            lexical: self.lexical.as_ref(),
            analyzer: &self.analyzer,
            bm25: &self.cfg.bm25,
            vectors: self.vectors.as_ref(),
            provider: self.embedder.as_ref(),
            scorer: Some(&self.scorer),
            chunks: &self.chunks,
        };
        Ok(hybrid_search(query, &ctx, fusion)?)
    }

    fn sources(&self, candidates: &[RetrievalCandidate]) -> Vec<Source> {
        candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let chunk = self.chunks.get(&c.chunk_id);
                Source {
                    rank: i + 1,
                    doc_id: chunk.map(|c| c.doc_id.clone()).unwrap_or_default(),
                    section_path: chunk.map(|c| c.section_path.clone()).unwrap_or_default(),
                    candidate: c.clone(),
                }
            })
            .collect()
    }

    fn prompt(&self, query: &str, candidates: &[RetrievalCandidate]) -> (String, Vec<String>) {
        let context: Vec<String> =
            candidates.iter().filter_map(|c| self.chunks.text(&c.chunk_id)).map(str::to_string).collect();
        let mut prompt = String::from("Answer the question using only the numbered sources and cite them.\n\n");
        prompt.push_str(&format!("Question: {query}\n\nSources:\n"));
        for (i, c) in candidates.iter().enumerate() {
            if let Some(chunk) = self.chunks.get(&c.chunk_id) {
                prompt.push_str(&format!(
                    "[{}] {} / {}\n{}\n",
                    i + 1,
                    chunk.doc_id,
                    chunk.section_path.join(" > "),
                    chunk.text
                ));
            }
        }
        (prompt, context)
    }

    /// Retrieve, then (unless dry-run) route, generate, charge and record
    /// provenance. The provenance record is persisted before this returns.
    pub fn query(&self, query: &str, flags: &QueryFlags) -> Result<QueryOutcome, PipelineError> {
        let fusion = self.effective_fusion(flags)?;
        let (candidates, timings) = self.retrieve(query, &fusion)?;
        let sources = self.sources(&candidates);
        if flags.dry_run {
            self.dry_runs.fetch_add(1, Ordering::Relaxed);
            return Ok(QueryOutcome { query: query.to_string(), sources, timings, answer: None });
        }

        let (_, decision) =
            plan(query, candidates.len(), &self.extractor, &self.cfg.complexity.weights, &self.cfg.routing);
        let (prompt, context) = self.prompt(query, &candidates);
        let request = GenerationRequest { query_id: String::new(), prompt: prompt.clone(), context };
        let result = self.orchestrator.execute_with_fallback(&request, &decision)?;
        let opts = AssembleOptions {
            store_prompt: self.cfg.provenance.store_prompt,
            coverage_threshold: self.cfg.provenance.coverage_threshold,
        };
        let record =
            assemble_provenance(query, &candidates, &self.chunks, &result, Some(&decision), &prompt, &self.analyzer, &opts)?;
        let entry = self.ledger.record_cost(&record.record_id, &result, &decision);
        if let Some(f) = self.ledger_file.lock().as_mut() {
            let mut line = serde_json::to_vec(&entry).expect("ledger entry serialises");
            line.push(b'\n');
            f.write_all(&line).map_err(io_err("appending to ledger"))?;
        }
        let provenance_id = record.record_id.clone();
        self.provenance.append(record)?;
        self.served.fetch_add(1, Ordering::Relaxed);
        self.per_tier[(decision.tier_id as usize).clamp(1, 3) - 1].fetch_add(1, Ordering::Relaxed);
        Ok(QueryOutcome {
            query: query.to_string(),
            sources,
            timings,
            answer: Some(Answer {
                text: result.text,
                provider_id: result.provider_id,
                model_id: result.model_id,
                tier_id: decision.tier_id,
                complexity_score: decision.complexity_score,
                attempts: result.attempts,
                cost: entry.cost,
                provenance_id,
            }),
        })
    }

    /// Chunk a corpus record and append it to the staging file. Staged chunks
    /// are merged by the next `reqrag index`; live indexes are untouched.
    pub fn stage_record(&self, raw: &str) -> Result<Vec<String>, PipelineError> {
        let chunks = chunk_record(raw, &self.cfg)?;
        let _guard = self.staging.lock();
        let pending = self.cfg.paths.pending();
        let mut staged_ids = std::collections::HashSet::new();
        if pending.exists() {
            for c in ChunkStore::load(&pending).map_err(io_err("reading staged chunks"))?.iter() {
                staged_ids.insert(c.chunk_id.clone());
            }
        }
        if let Some(c) = chunks.iter().find(|c| self.chunks.get(&c.chunk_id).is_some() || staged_ids.contains(&c.chunk_id)) {
            return Err(PipelineError::Input(format!("chunk {:?} already exists; doc_id must be new", c.chunk_id)));
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&pending)
            .map_err(io_err(format!("opening {}", pending.display())))?;
        for c in &chunks {
            let mut line = serde_json::to_vec(c).expect("chunk serialises");
            line.push(b'\n');
            f.write_all(&line).map_err(io_err("staging chunk"))?;
        }
        Ok(chunks.into_iter().map(|c| c.chunk_id).collect())
    }

    pub fn metrics(&self) -> MetricsSnapshot {
        MetricsSnapshot {
            queries_served: self.served.load(Ordering::Relaxed),
            dry_runs: self.dry_runs.load(Ordering::Relaxed),
            per_tier: [0, 1, 2].map(|i| self.per_tier[i].load(Ordering::Relaxed)),
            ledger_total: self.ledger.total(),
            ledger_by_tier: self.ledger.totals_by_tier(),
            breakers: self.orchestrator.breakers(),
            chunks: self.chunks.len(),
        }
    }
}

/// Ingest a corpus file into `<data_dir>/chunks.jsonl`.
pub fn ingest_file(path: &Path, cfg: &SystemConfig) -> Result<IngestStats, PipelineError> {
    let f = File::open(path).map_err(io_err(format!("opening {}", path.display())))?;
    let (chunks, stats) = ingest_corpus(BufReader::new(f), cfg).map_err(io_err(format!("reading {}", path.display())))?;
    if stats.documents > 0 {
        fs::create_dir_all(&cfg.paths.data_dir).map_err(io_err("creating data dir"))?;
        let store = ChunkStore::from_chunks(chunks).map_err(|e| PipelineError::Input(e.to_string()))?;
        store.save(&cfg.paths.chunks()).map_err(io_err("saving chunk store"))?;
    }
    Ok(stats)
}
