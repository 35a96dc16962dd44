//! Tab-separated run lines: `query_id chunk_id rank score dense sparse rrf rerank`.
//! Absent stage scores are written as `-`.

use std::io::{self, Write};

use super::RetrievalCandidate;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn format_run_line(query_id: &str, rank: usize, c: &RetrievalCandidate) -> String {
    format!(
        "{query_id}\t{}\t{rank}\t{}\t{}\t{}\t{}\t{}",
        c.chunk_id,
        c.final_score(),
        opt(c.dense_score),
        opt(c.sparse_score),
        c.rrf_score,
        opt(c.rerank_score)
    )
}

/// Write one query's ranking with 1-based ranks.
pub fn write_run<W: Write>(mut w: W, query_id: &str, candidates: &[RetrievalCandidate]) -> io::Result<()> {
    for (i, c) in candidates.iter().enumerate() {
        writeln!(w, "{}", format_run_line(query_id, i + 1, c))?;
    }
    Ok(())
}
