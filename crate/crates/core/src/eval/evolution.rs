use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::EvalError;
use crate::ingest::ChunkMetadata;

/// One requirement: the year it is attributed to and the categories it
/// belongs to (possibly several).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementRecord {
    pub year: i32,
    pub categories: BTreeSet<String>,
}

impl RequirementRecord {
    pub fn new<I, S>(year: i32, categories: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { year, categories: categories.into_iter().map(Into::into).collect() }
    }

    /// `None` when the chunk carries no year.
    pub fn from_chunk(m: &ChunkMetadata) -> Option<Self> {
        Some(Self { year: m.year?, categories: m.category.iter().cloned().collect() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Change {
    /// Whole percent, rounded half away from zero.
    Percent(i64),
    New,
}

impl Change {
    pub fn between(start: u64, end: u64) -> Self {
        if start == 0 {
            return if end == 0 { Change::Percent(0) } else { Change::New };
        }
        let num = (end as i128 - start as i128) * 100;
        let den = start as i128;
        let half = if num >= 0 { den } else { -den };
        Change::Percent(((2 * num + half) / (2 * den)) as i64)
    }
}

/// Integer with comma thousands separators.
pub fn format_count(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::with_capacity(s.len() + s.len() / 3);
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

impl fmt::Display for Change {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Change::New => f.write_str("New"),
            Change::Percent(p) if p > 0 => write!(f, "+{}%", format_count(p as u64)),
            Change::Percent(p) if p < 0 => write!(f, "-{}%", format_count(p.unsigned_abs())),
            Change::Percent(_) => f.write_str("0%"),
        }
    }
}

impl Serialize for Change {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionRow {
    pub category: String,
    pub count_start: u64,
    pub count_end: u64,
    pub change: Change,
}

impl EvolutionRow {
    fn new(category: String, count_start: u64, count_end: u64) -> Self {
        Self { change: Change::between(count_start, count_end), category, count_start, count_end }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTable {
    pub start_year: i32,
    pub end_year: i32,
    /// Ordered by end-year count descending, then name.
    pub rows: Vec<EvolutionRow>,
    /// Counts records, not category memberships.
    pub total: EvolutionRow,
}

impl EvolutionTable {
    pub fn row(&self, category: &str) -> Option<&EvolutionRow> {
        self.rows.iter().find(|r| r.category == category)
    }

    pub fn render_text(&self) -> String {
        let head = ["Category".to_string(), self.start_year.to_string(), self.end_year.to_string(), "Change".into()];
        let mut lines: Vec<[String; 4]> = vec![head];
        for r in self.rows.iter().chain(std::iter::once(&self.total)) {
            lines.push([
                r.category.clone(),
                format_count(r.count_start),
                format_count(r.count_end),
                r.change.to_string(),
            ]);
        }
        let mut w = [0usize; 4];
        for l in &lines {
            for (i, c) in l.iter().enumerate() {
                w[i] = w[i].max(c.chars().count());
            }
        }
        let mut out = String::new();
        for l in &lines {
            out.push_str(&format!("{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}\n", l[0], l[1], l[2], l[3], w0 = w[0], w1 = w[1], w2 = w[2], w3 = w[3]));
        }
        out
    }
}

pub fn evolution_report<'a, I>(records: I, start_year: i32, end_year: i32) -> Result<EvolutionTable, EvalError>
where
    I: IntoIterator<Item = &'a RequirementRecord>,
{
    let mut per_cat: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    let (mut total_start, mut total_end) = (0u64, 0u64);
    for r in records {
        let slot = if r.year == start_year {
            total_start += 1;
            0
        } else if r.year == end_year {
            total_end += 1;
            1
        } else {
            continue;
        };
        for c in &r.categories {
            let e = per_cat.entry(c.as_str()).or_default();
            if slot == 0 {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    if total_start == 0 {
        return Err(EvalError::NoRecords(start_year));
    }
    if total_end == 0 {
        return Err(EvalError::NoRecords(end_year));
    }
    let mut rows: Vec<EvolutionRow> =
        per_cat.into_iter().map(|(c, (s, e))| EvolutionRow::new(c.to_string(), s, e)).collect();
    rows.sort_by(|a, b| b.count_end.cmp(&a.count_end).then_with(|| a.category.cmp(&b.category)));
    Ok(EvolutionTable {
        start_year,
        end_year,
        rows,
        total: EvolutionRow::new("Total Requirements".into(), total_start, total_end),
    })
}
