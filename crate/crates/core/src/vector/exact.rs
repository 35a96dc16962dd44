use crate::embedding::EmbeddingVector;

use super::hnsw::sort_hits;

/// Brute-force top-`k` by cosine similarity, descending, ties by id.
pub fn exact_knn<'a, I>(items: I, query: &EmbeddingVector, k: usize) -> Vec<(String, f64)>
where
    I: IntoIterator<Item = (&'a str, &'a EmbeddingVector)>,
{
    let mut hits: Vec<(String, f64)> =
        items.into_iter().map(|(id, v)| (id.to_string(), query.cosine(v))).collect();
    sort_hits(&mut hits);
    hits.truncate(k);
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EMBEDDING_DIM;

    fn axis(i: usize, scale: f32) -> EmbeddingVector {
        let mut v = vec![0.0; EMBEDDING_DIM];
        v[i] = scale;
        v[(i + 1) % EMBEDDING_DIM] = 1.0;
        EmbeddingVector::normalize(v).unwrap()
    }

    #[test]
    fn orders_by_similarity_then_id() {
        let q = axis(0, 1.0);
        let a = axis(0, 1.0);
        let b = axis(0, 1.0);
        let c = axis(5, 1.0);
        let hits = exact_knn([("b", &b), ("a", &a), ("c", &c)], &q, 3);
        let ids: Vec<_> = hits.iter().map(|h| h.0.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!((hits[0].1 - 1.0).abs() < 1e-6);
        assert_eq!(exact_knn([("a", &a)], &q, 0), vec![]);
    }
}
