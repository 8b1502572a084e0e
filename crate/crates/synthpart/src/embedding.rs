//! Text embeddings and cosine similarity.
//!
//! The deterministic fallback embedding is a bag-of-words token count: lowercase,
//! strip punctuation, split on whitespace. Fallback vectors are sparse (token ->
//! count); live providers return dense vectors. Cosine similarity is defined for
//! both, and for a sparse pair it equals the dense cosine over the union of the
//! two vocabularies sorted lexicographically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding has zero norm")]
    ZeroVector,
    #[error("cannot compare sparse and dense embeddings")]
    MixedRepresentation,
    #[error("dense embeddings differ in dimension: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// An embedding vector: sparse token counts from the bag-of-words fallback,
/// or a dense vector from a live provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Embedding {
    Sparse(BTreeMap<String, f64>),
    Dense(Vec<f64>),
}

impl Embedding {
    pub fn norm(&self) -> f64 {
        match self {
            Embedding::Sparse(m) => m.values().map(|v| v * v).sum::<f64>().sqrt(),
            Embedding::Dense(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Embedding::Sparse(m) => m.values().all(|v| *v == 0.0),
            Embedding::Dense(v) => v.iter().all(|x| *x == 0.0),
        }
    }

    pub fn scale(&self, factor: f64) -> Embedding {
        match self {
            Embedding::Sparse(m) => {
                Embedding::Sparse(m.iter().map(|(k, v)| (k.clone(), v * factor)).collect())
            }
            Embedding::Dense(v) => Embedding::Dense(v.iter().map(|x| x * factor).collect()),
        }
    }
}

/// Lowercase, strip punctuation, split on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|word| {
            let cleaned: String = word
                .chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(|c| c.to_lowercase())
                .collect();
            if cleaned.is_empty() {
                None
            } else {
                Some(cleaned)
            }
        })
        .collect()
}

/// Token counts for one text. All-punctuation input yields an empty map,
/// which surfaces as `ZeroVector` during similarity.
pub fn token_counts(text: &str) -> BTreeMap<String, f64> {
    let mut counts = BTreeMap::new();
    for token in tokenize(text) {
        *counts.entry(token).or_insert(0.0) += 1.0;
    }
    counts
}

/// Bag-of-words embedding of one text (sparse token counts).
pub fn bag_of_words_embed(text: &str) -> Result<Embedding, EmbeddingError> {
    if text.is_empty() {
        return Err(EmbeddingError::EmptyText);
    }
    Ok(Embedding::Sparse(token_counts(text)))
}

/// Materialize a pair of bag-of-words vectors over the shared vocabulary:
/// the union of both texts' tokens, sorted lexicographically.
pub fn pair_vectors(a: &str, b: &str) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let counts_a = token_counts(a);
    let counts_b = token_counts(b);
    let mut vocab: Vec<String> = counts_a.keys().chain(counts_b.keys()).cloned().collect();
    vocab.sort();
    vocab.dedup();
    let vec_a = vocab
        .iter()
        .map(|t| counts_a.get(t).copied().unwrap_or(0.0))
        .collect();
    let vec_b = vocab
        .iter()
        .map(|t| counts_b.get(t).copied().unwrap_or(0.0))
        .collect();
    (vocab, vec_a, vec_b)
}

/// Mean of a set of embeddings; all must share a representation.
pub fn centroid(embeddings: &[Embedding]) -> Result<Embedding, EmbeddingError> {
    match embeddings {
        [] => Err(EmbeddingError::ZeroVector),
        [Embedding::Sparse(_), ..] => {
            let mut sums: BTreeMap<String, f64> = BTreeMap::new();
            for e in embeddings {
                let Embedding::Sparse(m) = e else {
                    return Err(EmbeddingError::MixedRepresentation);
                };
                for (k, v) in m {
                    *sums.entry(k.clone()).or_insert(0.0) += v;
                }
            }
            let n = embeddings.len() as f64;
            Ok(Embedding::Sparse(
                sums.into_iter().map(|(k, v)| (k, v / n)).collect(),
            ))
        }
        [Embedding::Dense(first), ..] => {
            let mut sums = vec![0.0; first.len()];
            for e in embeddings {
                let Embedding::Dense(v) = e else {
                    return Err(EmbeddingError::MixedRepresentation);
                };
                if v.len() != sums.len() {
                    return Err(EmbeddingError::DimensionMismatch(sums.len(), v.len()));
                }
                for (s, x) in sums.iter_mut().zip(v) {
                    *s += x;
                }
            }
            let n = embeddings.len() as f64;
            Ok(Embedding::Dense(sums.into_iter().map(|s| s / n).collect()))
        }
    }
}

/// Euclidean distance between two embeddings.
pub fn euclidean_distance(a: &Embedding, b: &Embedding) -> Result<f64, EmbeddingError> {
    match (a, b) {
        (Embedding::Sparse(ma), Embedding::Sparse(mb)) => {
            let mut sum = 0.0;
            for (k, va) in ma {
                let vb = mb.get(k).copied().unwrap_or(0.0);
                sum += (va - vb) * (va - vb);
            }
            for (k, vb) in mb {
                if !ma.contains_key(k) {
                    sum += vb * vb;
                }
            }
            Ok(sum.sqrt())
        }
        (Embedding::Dense(va), Embedding::Dense(vb)) => {
            if va.len() != vb.len() {
                return Err(EmbeddingError::DimensionMismatch(va.len(), vb.len()));
            }
            Ok(va
                .iter()
                .zip(vb)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt())
        }
        _ => Err(EmbeddingError::MixedRepresentation),
    }
}

/// Cosine similarity between two embeddings, in [-1, 1].
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64, EmbeddingError> {
    let dot = match (a, b) {
        (Embedding::Sparse(ma), Embedding::Sparse(mb)) => ma
            .iter()
            .filter_map(|(k, va)| mb.get(k).map(|vb| va * vb))
            .sum::<f64>(),
        (Embedding::Dense(va), Embedding::Dense(vb)) => {
            if va.len() != vb.len() {
                return Err(EmbeddingError::DimensionMismatch(va.len(), vb.len()));
            }
            va.iter().zip(vb).map(|(x, y)| x * y).sum::<f64>()
        }
        _ => return Err(EmbeddingError::MixedRepresentation),
    };
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    // self-similarity is exactly 1; sqrt round-off would otherwise leave it
    // a few ulps short
    if a == b {
        return Ok(1.0);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}
