//! Text-to-vector providers.
//!
//! Every provider yields 512-dimensional unit vectors. The built-in
//! [`HashedBagProvider`] is a pure function of its input: tokens (optionally
//! folded through a synonym lexicon) are hashed into signed buckets and the
//! bucket vector is L2-normalised. [`RemoteEmbeddingProvider`] speaks a small
//! JSON-over-HTTP protocol and is held to the same invariants.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexical::Analyzer;

pub const EMBEDDING_DIM: usize = 512;
const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyInput,
    #[error("expected {expected} dimensions, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("vector has zero or non-finite norm")]
    Degenerate,
    #[error("vector norm {0} is not 1")]
    NotUnit(f64),
    #[error("provider {provider_id}: {message}")]
    Provider { provider_id: String, message: String },
    #[error("batch failed at indices {:?}", failures.iter().map(|f| f.0).collect::<Vec<_>>())]
    Batch { failures: Vec<(usize, String)> },
}

/// A 512-d unit-norm vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    /// Accept values that are already unit-norm (within 1e-6).
    pub fn from_unit(values: Vec<f32>) -> Result<Self, EmbedError> {
        check_dim(values.len())?;
        let norm = l2(&values);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(EmbedError::NotUnit(norm));
        }
        Ok(Self(values))
    }

    /// Normalise arbitrary non-zero values.
    pub fn normalize(values: Vec<f32>) -> Result<Self, EmbedError> {
        check_dim(values.len())?;
        let norm = l2(&values);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(EmbedError::Degenerate);
        }
        Ok(Self(values.into_iter().map(|v| (v as f64 / norm) as f32).collect()))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        l2(&self.0)
    }

    /// Cosine similarity, accumulated in f64.
    pub fn cosine(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a as f64 * b as f64).sum()
    }

    /// Fast f32 dot product for graph traversal.
    #[inline]
    pub fn dot(&self, other: &Self) -> f32 {
        dot_f32(&self.0, &other.0)
    }
}

#[inline]
pub(crate) fn dot_f32(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        let (x, y) = (&a[i * 8..i * 8 + 8], &b[i * 8..i * 8 + 8]);
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0f32;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    acc.iter().sum::<f32>() + tail
}

fn l2(values: &[f32]) -> f64 {
    values.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt()
}

fn check_dim(found: usize) -> Result<(), EmbedError> {
    if found != EMBEDDING_DIM {
        return Err(EmbedError::Dimension { expected: EMBEDDING_DIM, found });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub provider_id: String,
    pub model_id: String,
    pub dimension: usize,
}

pub trait EmbeddingProvider: Send + Sync {
    fn descriptor(&self) -> &ProviderDescriptor;

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let mut out = Vec::with_capacity(texts.len());
        let mut failures = Vec::new();
        for (i, t) in texts.iter().enumerate() {
            match self.embed(t) {
                Ok(v) => out.push(v),
                Err(e) => failures.push((i, e.to_string())),
            }
        }
        if failures.is_empty() {
            Ok(out)
        } else {
            Err(EmbedError::Batch { failures })
        }
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Bucket index and sign for one token under the built-in provider.
pub fn token_bucket(token: &str) -> (usize, f32) {
    let h = fnv1a(token.as_bytes());
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    ((h % EMBEDDING_DIM as u64) as usize, sign)
}

/// Deterministic hashed bag-of-tokens provider.
#[derive(Debug, Clone)]
pub struct HashedBagProvider {
    descriptor: ProviderDescriptor,
    analyzer: Analyzer,
    lexicon: HashMap<String, String>,
}

impl HashedBagProvider {
    pub fn new(analyzer: Analyzer) -> Self {
        Self {
            descriptor: ProviderDescriptor {
                provider_id: "builtin".into(),
                model_id: "hashed-bag-v1".into(),
                dimension: EMBEDDING_DIM,
            },
            analyzer,
            lexicon: HashMap::new(),
        }
    }

    /// Fold surface tokens onto shared concept keys before hashing, so that
    /// synonyms land in the same bucket. Keys and values are tokenizer output.
    pub fn with_lexicon(mut self, lexicon: HashMap<String, String>) -> Self {
        self.lexicon = lexicon;
        self.descriptor.model_id = format!("hashed-bag-v1+lexicon{}", self.lexicon.len());
        self
    }

    pub fn concept<'a>(&'a self, token: &'a str) -> &'a str {
        self.lexicon.get(token).map_or(token, String::as_str)
    }
}

impl EmbeddingProvider for HashedBagProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.trim().is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let mut buckets = vec![0f32; EMBEDDING_DIM];
        for token in self.analyzer.tokenize(text) {
            let (b, sign) = token_bucket(self.concept(&token));
            buckets[b] += sign;
        }
        if buckets.iter().all(|&v| v == 0.0) {
            // no tokens, or signed collisions cancelled out: fall back to the raw text
            let (b, sign) = token_bucket(text.trim());
            buckets[b] = sign;
        }
        EmbeddingVector::normalize(buckets)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model_id: &'a str,
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
}

/// Remote provider: `POST {endpoint}` with `{model_id, texts[]}`, expecting
/// `{vectors[][]}` back. Returned vectors are re-normalised and checked.
#[derive(Debug, Clone)]
pub struct RemoteEmbeddingProvider {
    descriptor: ProviderDescriptor,
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl RemoteEmbeddingProvider {
    pub fn new(
        provider_id: impl Into<String>,
        model_id: impl Into<String>,
        endpoint: impl Into<String>,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            descriptor: ProviderDescriptor {
                provider_id: provider_id.into(),
                model_id: model_id.into(),
                dimension: EMBEDDING_DIM,
            },
            endpoint: endpoint.into(),
            api_key,
            agent,
        }
    }

    fn provider_err(&self, message: impl Into<String>) -> EmbedError {
        EmbedError::Provider {
            provider_id: self.descriptor.provider_id.clone(),
            message: message.into(),
        }
    }

    fn request(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let body = EmbedRequest { model_id: &self.descriptor.model_id, texts };
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| self.provider_err(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(self.provider_err(format!("HTTP {}", resp.status())));
        }
        let parsed: EmbedResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| self.provider_err(format!("bad response body: {e}")))?;
        if parsed.vectors.len() != texts.len() {
            return Err(self.provider_err(format!(
                "expected {} vectors, got {}",
                texts.len(),
                parsed.vectors.len()
            )));
        }
        Ok(parsed.vectors)
    }
}

impl EmbeddingProvider for RemoteEmbeddingProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.trim().is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let v = self.request(&[text])?.pop().expect("length checked");
        EmbeddingVector::normalize(v)
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let empty: Vec<(usize, String)> = texts
            .iter()
            .enumerate()
            .filter(|(_, t)| t.trim().is_empty())
            .map(|(i, _)| (i, EmbedError::EmptyInput.to_string()))
            .collect();
        if !empty.is_empty() {
            return Err(EmbedError::Batch { failures: empty });
        }
        let vectors = self.request(texts)?;
        let mut out = Vec::with_capacity(vectors.len());
        let mut failures = Vec::new();
        for (i, v) in vectors.into_iter().enumerate() {
            match EmbeddingVector::normalize(v) {
                Ok(v) => out.push(v),
                Err(e) => failures.push((i, e.to_string())),
            }
        }
        if failures.is_empty() {
            Ok(out)
        } else {
            Err(EmbedError::Batch { failures })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexical::{DomainDictionary, TokenizerOptions};
    use rand::{Rng, SeedableRng};

    fn provider() -> HashedBagProvider {
        HashedBagProvider::new(Analyzer::new(&DomainDictionary::default(), TokenizerOptions::default()))
    }

    #[test]
    fn deterministic_and_unit_norm() {
        let p = provider();
        let a = p.embed("Emergency stop shall halt the conveyor").unwrap();
        let b = p.embed("Emergency stop shall halt the conveyor").unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-6);
        assert!((a.cosine(&a) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_text_rejected() {
        assert_eq!(provider().embed("").unwrap_err(), EmbedError::EmptyInput);
        assert_eq!(provider().embed("   ").unwrap_err(), EmbedError::EmptyInput);
    }

    #[test]
    fn punctuation_only_text_still_embeds() {
        let v = provider().embed("---").unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn disjoint_buckets_are_orthogonal() {
        let (ba, _) = token_bucket("valve");
        let (bb, _) = token_bucket("firmware");
        assert_ne!(ba, bb, "fixture tokens must hash to distinct buckets");
        let p = provider();
        let c = p.embed("valve").unwrap().cosine(&p.embed("firmware").unwrap());
        assert!(c.abs() < 1e-6);
    }

    #[test]
    fn lexicon_maps_synonyms_together() {
        let lex = HashMap::from([("halt".to_string(), "stop".to_string())]);
        let p = provider().with_lexicon(lex);
        let c = p.embed("halt").unwrap().cosine(&p.embed("stop").unwrap());
        assert!((c - 1.0).abs() < 1e-6);
    }

    #[test]
    fn batch_matches_single() {
        let p = provider();
        assert!(p.embed_batch(&[]).unwrap().is_empty());
        assert_eq!(p.embed_batch(&["x y"]).unwrap(), vec![p.embed("x y").unwrap()]);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let texts: Vec<String> = (0..100)
            .map(|_| {
                let n = rng.random_range(1..12);
                (0..n)
                    .map(|_| {
                        let len = rng.random_range(1..8);
                        (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect::<String>()
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let batch = p.embed_batch(&refs).unwrap();
        for (t, v) in refs.iter().zip(&batch) {
            assert_eq!(&p.embed(t).unwrap(), v);
        }
    }

    #[test]
    fn batch_reports_failing_indices() {
        let err = provider().embed_batch(&["ok", "", "fine", " "]).unwrap_err();
        match err {
            EmbedError::Batch { failures } => {
                assert_eq!(failures.iter().map(|f| f.0).collect::<Vec<_>>(), vec![1, 3])
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vector_invariants() {
        assert!(matches!(
            EmbeddingVector::normalize(vec![0.0; 3]),
            Err(EmbedError::Dimension { found: 3, .. })
        ));
        assert_eq!(EmbeddingVector::normalize(vec![0.0; EMBEDDING_DIM]), Err(EmbedError::Degenerate));
        let mut v = vec![0.0; EMBEDDING_DIM];
        v[0] = 2.0;
        assert!(matches!(EmbeddingVector::from_unit(v.clone()), Err(EmbedError::NotUnit(_))));
        assert_eq!(EmbeddingVector::normalize(v).unwrap().as_slice()[0], 1.0);
    }
}
