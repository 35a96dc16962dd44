//! Sparse retrieval: domain-aware tokenization and a BM25 inverted index.

mod index;
mod snapshot;
mod tokenizer;

pub use index::{idf, term_weight, Bm25Params, InvertedIndex, LexicalError, Posting};
pub use tokenizer::{tokenize, Analyzer, DictionaryError, DomainDictionary, TokenizerOptions};
