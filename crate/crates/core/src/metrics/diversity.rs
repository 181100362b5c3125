use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::repr::EmbeddingTable;
use crate::{Error, Result};

/// Intrinsic richness measures of one example.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiversityFeatures {
    pub types: f64,
    pub type_token_ratio: f64,
    pub entropy: f64,
    pub simpson: f64,
    pub renyi_entropy: f64,
    pub quadratic_entropy: f64,
}

impl DiversityFeatures {
    pub fn to_array(self) -> [f64; 6] {
        [
            self.types,
            self.type_token_ratio,
            self.entropy,
            self.simpson,
            self.renyi_entropy,
            self.quadratic_entropy,
        ]
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Computes the six diversity measures of an example.
///
/// Type and token counts use every token. The distributional measures use
/// the corpus probabilities `p(w)` of the example's in-vocabulary types,
/// renormalized over those types. Quadratic entropy skips type pairs where
/// either side has no (non-zero) embedding; without a table it is zero.
pub fn diversity_features<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    table: Option<&EmbeddingTable>,
    alpha: f64,
) -> Result<DiversityFeatures> {
    if tokens.is_empty() {
        return Err(Error::invalid("diversity of an empty example"));
    }
    if alpha == 1.0 || alpha <= 0.0 {
        return Err(Error::invalid("Renyi entropy order must be positive and different from 1"));
    }
    let all_types: BTreeSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let in_vocab: Vec<(&str, f64)> = all_types
        .iter()
        .filter_map(|&t| vocab.probability(t).filter(|&p| p > 0.0).map(|p| (t, p)))
        .collect();
    if in_vocab.is_empty() {
        return Err(Error::NoInVocabularyTokens);
    }
    let mass: f64 = in_vocab.iter().map(|(_, p)| p).sum();
    let probs: Vec<f64> = in_vocab.iter().map(|(_, p)| p / mass).collect();

    let entropy = -probs.iter().map(|&p| p * libm::log(p)).sum::<f64>();
    let simpson = -probs.iter().map(|&p| p * p).sum::<f64>();
    let power_sum: f64 = probs.iter().map(|&p| libm::pow(p, alpha)).sum();
    let renyi_entropy = libm::log(power_sum) / (1.0 - alpha);

    let mut quadratic_entropy = 0.0;
    if let Some(table) = table {
        let embedded: Vec<(&[f64], f64, f64)> = in_vocab
            .iter()
            .zip(&probs)
            .filter_map(|(&(t, _), &p)| {
                let v = table.get(t)?;
                let n = norm(v);
                (n > 0.0).then_some((v, n, p))
            })
            .collect();
        for &(vi, ni, pi) in &embedded {
            for &(vj, nj, pj) in &embedded {
                let dot: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
                quadratic_entropy += (dot / (ni * nj)) * pi * pj;
            }
        }
    }

    Ok(DiversityFeatures {
        types: all_types.len() as f64,
        type_token_ratio: all_types.len() as f64 / tokens.len() as f64,
        entropy,
        simpson,
        renyi_entropy,
        quadratic_entropy,
    })
}
