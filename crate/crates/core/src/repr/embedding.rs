use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::{Error, Result};

/// Default frequency-discount factor `a` in `sqrt(a / p(w))`.
pub const DEFAULT_SMOOTHING: f64 = 1e-3;

/// Pre-trained word vectors of a fixed dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    dim: usize,
    smoothing: f64,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, smoothing: f64) -> Result<Self> {
        if !(smoothing > 0.0) {
            return Err(Error::invalid("embedding smoothing factor must be positive"));
        }
        Ok(EmbeddingTable {
            dim,
            smoothing,
            vectors: BTreeMap::new(),
        })
    }

    /// Inserts or replaces a vector. The first insert into an empty,
    /// zero-dimensional table fixes the dimension.
    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if self.vectors.is_empty() && self.dim == 0 {
            self.dim = vector.len();
        }
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding has a non-finite entry"));
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    /// Drops every word that is not in `vocab`.
    pub fn restrict_to(&mut self, vocab: &Vocabulary) {
        self.vectors.retain(|w, _| vocab.index_of(w).is_some());
    }

    /// Multiplies every vector by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for v in out.vectors.values_mut() {
            v.iter_mut().for_each(|x| *x *= c);
        }
        out
    }
}

/// A real vector that may have negative entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dense vector has a non-finite entry"));
        }
        Ok(DenseVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Frequency-discounted average `(1/n) Σ v_w · sqrt(a / p(w))` over the tokens
/// that have both an embedding and a vocabulary probability; `n` counts only
/// those tokens.
pub fn embed_example<S: AsRef<str>>(
    tokens: &[S],
    table: &EmbeddingTable,
    vocab: &Vocabulary,
) -> Result<DenseVector> {
    let mut sum = vec![0.0; table.dim()];
    let mut n = 0usize;
    for t in tokens {
        let t = t.as_ref();
        let (Some(v), Some(p)) = (table.get(t), vocab.probability(t)) else {
            continue;
        };
        if p <= 0.0 {
            continue;
        }
        let weight = libm::sqrt(table.smoothing() / p);
        for (s, x) in sum.iter_mut().zip(v) {
            *s += weight * x;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoEmbeddedTokens);
    }
    let inv = 1.0 / n as f64;
    DenseVector::new(sum.into_iter().map(|s| s * inv).collect())
        .map_err(|_| Error::invalid(format!("embedding average overflowed over {n} tokens")))
}
