use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use reqrag_cli::commands::{self, EvalArgs};
use reqrag_cli::{http, load_config, CliError, CliResult};
use reqrag_core::eval::DEFAULT_RELEVANCE_THRESHOLD;
use reqrag_core::pipeline::{Pipeline, QueryFlags};

#[derive(Parser)]
#[command(name = "reqrag", version, about = "Hybrid retrieval and grounded answering over requirements documents")]
struct Cli {
    /// Configuration file (defaults to ./reqrag.toml when present)
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct FlagArgs {
    /// Skip the reranking stage
    #[arg(long)]
    no_rerank: bool,
    /// BM25 only
    #[arg(long, conflicts_with = "dense_only")]
    sparse_only: bool,
    /// Vector search only
    #[arg(long)]
    dense_only: bool,
}

impl FlagArgs {
    fn flags(self, dry_run: bool) -> QueryFlags {
        QueryFlags { no_rerank: self.no_rerank, sparse_only: self.sparse_only, dense_only: self.dense_only, dry_run }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and chunk a JSONL corpus into the data directory
    Ingest {
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Build lexical and vector indexes from the chunk store
    Index {
        /// Build the vector index only
        #[arg(long)]
        dense_only: bool,
    },
    /// Answer one question
    Query {
        query: String,
        #[command(flatten)]
        flags: FlagArgs,
        /// Retrieve only; no generation call
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        json: bool,
    },
    /// Retrieve for a file of `query_id<TAB>query` lines and write a run file
    Batch {
        queries: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        /// Also write per-query stage timings as JSONL
        #[arg(long)]
        timings: Option<PathBuf>,
        #[command(flatten)]
        flags: FlagArgs,
    },
    /// Score a run file against relevance judgments
    Eval {
        run: PathBuf,
        qrels: PathBuf,
        /// Baseline run to compare against with a Mann-Whitney U test
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Stage timings JSONL from `reqrag batch --timings`
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Minimum grade counted as relevant
        #[arg(long, default_value_t = DEFAULT_RELEVANCE_THRESHOLD)]
        threshold: u8,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP service
    Serve {
        /// Overrides `server.bind`
        #[arg(long)]
        bind: Option<String>,
    },
    /// Print a provenance record
    Provenance {
        id: String,
        /// Check the record's attributions against the current chunk store
        #[arg(long)]
        verify: bool,
    },
    /// Summarise the cost ledger
    Ledger {
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic corpus, queries, judgments and config to a directory
    DemoData {
        dir: PathBuf,
        #[arg(long, default_value_t = 50)]
        docs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let cfg = || load_config(cli.config.as_deref());
    match cli.command {
        Command::Ingest { corpus, json } => commands::ingest(&cfg()?, &corpus, json, &mut out).map(drop),
        Command::Index { dense_only } => commands::index(&cfg()?, dense_only, &mut out).map(drop),
        Command::Query { query, flags, dry_run, json } => {
            commands::query(cfg()?, &query, flags.flags(dry_run), json, &mut out).map(drop)
        }
        Command::Batch { queries, output, timings, flags } => {
            commands::batch(cfg()?, &queries, &output, timings.as_deref(), flags.flags(true), &mut out).map(drop)
        }
        Command::Eval { run, qrels, baseline, timings, threshold, json } => {
            let args = EvalArgs { run: &run, qrels: &qrels, baseline: baseline.as_deref(), timings: timings.as_deref(), threshold, json };
            commands::eval(&args, &mut out).map(drop)
        }
        Command::Serve { bind } => {
            let cfg = cfg()?;
            let bind = bind.unwrap_or_else(|| cfg.server.bind.clone());
            let pipeline = Arc::new(Pipeline::open(cfg)?);
            let rt = tokio::runtime::Runtime::new().map_err(CliError::operational)?;
            rt.block_on(http::serve(pipeline, &bind)).map_err(CliError::operational)
        }
        Command::Provenance { id, verify } => {
            if commands::provenance(&cfg()?, &id, verify, &mut out)? {
                Ok(())
            } else {
                Err(CliError::operational(anyhow::anyhow!("record {id} failed verification")))
            }
        }
        Command::Ledger { json } => commands::ledger(&cfg()?, json, &mut out).map(drop),
        Command::DemoData { dir, docs, seed } => commands::demo_data(&dir, docs, seed, &mut out),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CliError::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => {
            let _ = io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
