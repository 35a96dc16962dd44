mod common;

use common::{dense_only, hybrid_rerank, sparse_only, BenchmarkRig};
use reqrag_core::synthetic::QueryKind;

#[test]
fn hybrid_beats_dense_beats_sparse() {
    let rig = BenchmarkRig::new(50, 11);
    let (s, d, h) = (rig.mrr(&sparse_only(), None), rig.mrr(&dense_only(), None), rig.mrr(&hybrid_rerank(), None));
    println!("mrr sparse={s:.4} dense={d:.4} hybrid+rerank={h:.4}");
    assert!(h >= d && d >= s, "sparse={s} dense={d} hybrid={h}");
}

#[test]
fn each_retriever_wins_its_own_population() {
    let rig = BenchmarkRig::new(50, 11);
    assert_eq!(rig.mrr(&sparse_only(), Some(QueryKind::Exact)), 1.0);
    assert_eq!(rig.mrr(&sparse_only(), Some(QueryKind::Paraphrase)), 0.0);
    assert_eq!(rig.mrr(&dense_only(), Some(QueryKind::Paraphrase)), 1.0);
    assert!(rig.mrr(&dense_only(), Some(QueryKind::Exact)) < 1.0);
}

#[test]
fn ordering_holds_across_seeds() {
    for seed in [1, 2, 3, 4, 5] {
        let rig = BenchmarkRig::new(50, seed);
        let (s, d, h) = (rig.mrr(&sparse_only(), None), rig.mrr(&dense_only(), None), rig.mrr(&hybrid_rerank(), None));
        assert!(h >= d && d >= s, "seed {seed}: sparse={s} dense={d} hybrid={h}");
    }
}
