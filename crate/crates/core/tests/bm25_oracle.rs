use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use reqrag_core::lexical::{Analyzer, Bm25Params, InvertedIndex};

fn fixture() -> InvertedIndex {
    let docs = [
        ("c1", "brake fluid brake pressure"),
        ("c2", "brake pedal travel"),
        ("c3", "coolant pressure sensor"),
        ("c4", "fluid level sensor fluid fluid"),
        ("c5", "wiring harness routing"),
    ];
    InvertedIndex::build(docs, &Analyzer::default()).unwrap()
}

#[test]
fn five_chunk_fixture_matches_hand_evaluation() {
    // N = 5, avgdl = 18 / 5 = 3.6, df(brake) = df(fluid) = 2 so idf = ln(1 + 3.5 / 2.5) = ln 2.4.
    // Length norms K = 1.5 (0.25 + 0.75 dl / 3.6): dl 4 -> 1.625, dl 5 -> 1.9375, dl 3 -> 1.3125.
    let idx = fixture();
    let p = Bm25Params { k1: 1.5, b: 0.75 };
    let q: Vec<String> = ["brake", "fluid"].map(String::from).to_vec();
    let idf = 2.4f64.ln();
    let expected = [
        ("c1", idf * (2.0 * 2.5 / (2.0 + 1.625) + 2.5 / (1.0 + 1.625))),
        ("c2", idf * (2.5 / (1.0 + 1.3125))),
        ("c3", 0.0),
        ("c4", idf * (3.0 * 2.5 / (3.0 + 1.9375))),
        ("c5", 0.0),
    ];
    for (id, want) in expected {
        let got = idx.bm25_score(&q, id, &p).unwrap();
        assert!((got - want).abs() < 1e-9, "{id}: {got} vs {want}");
    }
    let ranked: Vec<String> = idx.search_tokens(&q, &p, 10).into_iter().map(|h| h.0).collect();
    assert_eq!(ranked, ["c1", "c4", "c2"]);
    assert!((idx.avg_doc_length() - 3.6).abs() < 1e-12);
}

#[test]
fn repeated_query_terms_count_once() {
    let idx = fixture();
    let p = Bm25Params::default();
    let once = idx.bm25_score(&["brake".into()], "c1", &p).unwrap();
    let twice = idx.bm25_score(&["brake".into(), "brake".into()], "c1", &p).unwrap();
    assert_eq!(once, twice);
}

/// Straight from the definition, with no shared code.
fn reference_scores(docs: &[Vec<&str>], query: &[&str], k1: f64, b: f64) -> Vec<f64> {
    let n = docs.len() as f64;
    let avgdl = if docs.is_empty() { 0.0 } else { docs.iter().map(|d| d.len()).sum::<usize>() as f64 / n };
    let terms: BTreeSet<&str> = query.iter().copied().collect();
    docs.iter()
        .map(|d| {
            let dl = d.len() as f64;
            terms
                .iter()
                .map(|t| {
                    let tf = d.iter().filter(|w| *w == t).count() as f64;
                    if tf == 0.0 {
                        return 0.0;
                    }
                    let df = docs.iter().filter(|o| o.contains(t)).count() as f64;
                    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                    let norm = if avgdl > 0.0 { dl / avgdl } else { 1.0 };
                    idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm))
                })
                .sum()
        })
        .collect()
}

const VOCAB: [&str; 6] = ["relay", "coil", "fuse", "panel", "wire", "seal"];

fn corpus() -> impl Strategy<Value = Vec<Vec<&'static str>>> {
    prop::collection::vec(prop::collection::vec(prop::sample::select(&VOCAB[..]), 0..10), 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_brute_force_reference(
        docs in corpus(),
        query in prop::collection::vec(prop::sample::select(&VOCAB[..]), 1..5),
        k1 in 0.0f64..3.0,
        b in 0.0f64..=1.0,
        top_k in 1usize..10,
    ) {
        let ids: Vec<String> = (0..docs.len()).map(|i| format!("d{i:02}")).collect();
        let texts: Vec<String> = docs.iter().map(|d| d.join(" ")).collect();
        let idx = InvertedIndex::build(ids.iter().map(String::as_str).zip(texts.iter().map(String::as_str)), &Analyzer::default()).unwrap();
        let params = Bm25Params { k1, b };
        let q: Vec<String> = query.iter().map(|s| s.to_string()).collect();
        let want = reference_scores(&docs, &query, k1, b);
        for (id, w) in ids.iter().zip(&want) {
            let got = idx.bm25_score(&q, id, &params).unwrap();
            prop_assert!((got - w).abs() < 1e-9, "{}: {} vs {}", id, got, w);
        }

        // ranking: docs sharing a query term, score desc then id asc
        let qset: BTreeSet<&str> = query.iter().copied().collect();
        let mut expected: Vec<(usize, f64)> = want.iter().copied().enumerate()
            .filter(|(i, _)| docs[*i].iter().any(|w| qset.contains(w)))
            .collect();
        expected.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        expected.truncate(top_k);
        let got = idx.search_tokens(&q, &params, top_k);
        prop_assert_eq!(got.len(), expected.len());
        for ((gid, gs), (ei, es)) in got.iter().zip(&expected) {
            prop_assert!((gs - es).abs() < 1e-9);
            // equal scores may legitimately differ in the last ulp; only compare ids when separated
            if expected.iter().filter(|(_, s)| (s - es).abs() < 1e-9).count() == 1 {
                prop_assert_eq!(gid, &ids[*ei]);
            }
        }

        // postings agree with a direct count
        let mut tf: HashMap<(&str, usize), u32> = HashMap::new();
        for (i, d) in docs.iter().enumerate() {
            for w in d {
                *tf.entry((w, i)).or_default() += 1;
            }
        }
        for term in VOCAB {
            let postings = idx.postings(term);
            let want: Vec<(&str, u32)> = (0..docs.len())
                .filter_map(|i| tf.get(&(term, i)).map(|&c| (ids[i].as_str(), c)))
                .collect();
            prop_assert_eq!(postings, want);
        }
    }
}
