//! Qrels (`query_id chunk_id grade`) and run (`query_id chunk_id rank score ...`)
//! files. Fields are tab separated; lines without tabs are split on
//! whitespace. Blank lines and `#` comments are skipped.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::EvalError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    pub judgments: BTreeMap<String, HashMap<String, u8>>,
}

impl Qrels {
    pub fn insert(&mut self, query_id: &str, chunk_id: &str, grade: u8) {
        self.judgments.entry(query_id.to_string()).or_default().insert(chunk_id.to_string(), grade);
    }

    pub fn grade(&self, query_id: &str, chunk_id: &str) -> Option<u8> {
        self.judgments.get(query_id)?.get(chunk_id).copied()
    }

    pub fn query(&self, query_id: &str) -> Result<&HashMap<String, u8>, EvalError> {
        self.judgments.get(query_id).ok_or_else(|| EvalError::MissingQuery(query_id.to_string()))
    }
}

/// Per query, chunk ids with scores in ranked order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    pub rankings: BTreeMap<String, Vec<(String, f64)>>,
}

impl RunFile {
    pub fn from_rankings<I, S>(rankings: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<(String, f64)>)>,
        S: Into<String>,
    {
        Self { rankings: rankings.into_iter().map(|(q, r)| (q.into(), r)).collect() }
    }

    /// Convenience for tests: ids only, scores descending from `len`.
    pub fn from_ids(rankings: &[(&str, &[&str])]) -> Self {
        Self::from_rankings(rankings.iter().map(|(q, ids)| {
            let n = ids.len();
            (*q, ids.iter().enumerate().map(|(i, id)| (id.to_string(), (n - i) as f64)).collect())
        }))
    }
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    })
}

pub fn parse_qrels(text: &str) -> Result<Qrels, EvalError> {
    let mut q = Qrels::default();
    for (line, raw) in data_lines(text) {
        let err = |message: String| EvalError::Parse { line, message };
        let f = fields(raw);
        if f.len() != 3 {
            return Err(err(format!("expected 3 fields (query_id, chunk_id, grade), found {}", f.len())));
        }
        if f[0].is_empty() || f[1].is_empty() {
            return Err(err("empty query_id or chunk_id".into()));
        }
        let grade: u8 = f[2].parse().map_err(|_| err(format!("grade {:?} is not an integer", f[2])))?;
        if grade > 4 {
            return Err(err(format!("grade {grade} outside 0..=4")));
        }
        if q.grade(f[0], f[1]).is_some() {
            return Err(err(format!("duplicate judgment for ({}, {})", f[0], f[1])));
        }
        q.insert(f[0], f[1], grade);
    }
    Ok(q)
}

pub fn parse_run(text: &str) -> Result<RunFile, EvalError> {
    let mut raw: BTreeMap<String, Vec<(u32, String, f64)>> = BTreeMap::new();
    let mut seen: HashMap<String, (HashSet<String>, HashSet<u32>)> = HashMap::new();
    for (line, l) in data_lines(text) {
        let err = |message: String| EvalError::Parse { line, message };
        let f = fields(l);
        if f.len() < 4 {
            return Err(err(format!("expected at least 4 fields (query_id, chunk_id, rank, score), found {}", f.len())));
        }
        let rank: u32 = f[2].parse().map_err(|_| err(format!("rank {:?} is not a positive integer", f[2])))?;
        if rank == 0 {
            return Err(err("rank must be >= 1".into()));
        }
        let score: f64 = f[3].parse().map_err(|_| err(format!("score {:?} is not a number", f[3])))?;
        if !score.is_finite() {
            return Err(err(format!("score {score} is not finite")));
        }
        let (ids, ranks) = seen.entry(f[0].to_string()).or_default();
        if !ids.insert(f[1].to_string()) {
            return Err(err(format!("chunk {:?} repeated for query {:?}", f[1], f[0])));
        }
        if !ranks.insert(rank) {
            return Err(err(format!("rank {rank} repeated for query {:?}", f[0])));
        }
        raw.entry(f[0].to_string()).or_default().push((rank, f[1].to_string(), score));
    }
    let rankings = raw
        .into_iter()
        .map(|(q, mut v)| {
            v.sort_by_key(|e| e.0);
            (q, v.into_iter().map(|(_, id, s)| (id, s)).collect())
        })
        .collect();
    Ok(RunFile { rankings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qrels_parse() {
        let q = parse_qrels("# comment\nq1\tA\t3\n\nq1\tB\t0\nq2 C 4\n").unwrap();
        assert_eq!(q.grade("q1", "A"), Some(3));
        assert_eq!(q.grade("q2", "C"), Some(4));
        assert_eq!(q.judgments.len(), 2);
    }

    #[test]
    fn qrels_errors_carry_line() {
        assert_eq!(
            parse_qrels("q1\tA\t3\nq1\tB\t7\n").unwrap_err(),
            EvalError::Parse { line: 2, message: "grade 7 outside 0..=4".into() }
        );
        assert!(matches!(parse_qrels("q1\tA\n"), Err(EvalError::Parse { line: 1, .. })));
        assert!(matches!(parse_qrels("q1\tA\t1\nq1\tA\t2"), Err(EvalError::Parse { line: 2, .. })));
    }

    #[test]
    fn run_sorted_by_rank_with_extra_columns() {
        let r = parse_run("q1\tB\t2\t0.5\t-\nq1\tA\t1\t0.9\t0.1\t-\n").unwrap();
        assert_eq!(r.rankings["q1"], vec![("A".to_string(), 0.9), ("B".to_string(), 0.5)]);
    }

    #[test]
    fn run_errors() {
        assert!(matches!(parse_run("q1\tA\t1\n"), Err(EvalError::Parse { line: 1, .. })));
        assert!(matches!(parse_run("q1\tA\tx\t1\n"), Err(EvalError::Parse { line: 1, .. })));
        assert!(matches!(parse_run("q1\tA\t1\t1\nq1\tA\t2\t1\n"), Err(EvalError::Parse { line: 2, .. })));
        assert!(matches!(parse_run("q1\tA\t1\t1\nq1\tB\t1\t1\n"), Err(EvalError::Parse { line: 2, .. })));
    }
}
