//! Dense nearest-neighbour search over unit-norm embeddings.

mod exact;
mod hnsw;
mod snapshot;

pub use exact::exact_knn;
pub use hnsw::{HnswGraph, HnswParams, VectorIndexError};
