//! Latent Dirichlet allocation trained by collapsed Gibbs sampling, with
//! fold-in inference of per-example topic proportions.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ProbVector;
use crate::corpus::Vocabulary;
use crate::rng::{derive_seed, SeededRng};
use crate::{seeded_rng, Error, Result};

const INFERENCE_STREAM: u64 = 0x1f_e2e0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub topics: usize,
    pub iterations: usize,
    /// Document-topic prior; `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub inference_sweeps: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 50,
            iterations: 10,
            alpha: None,
            beta: 0.01,
            inference_sweeps: 20,
            seed: 0,
        }
    }
}

/// A trained topic model. Counts are stored word-major (`word * topics + topic`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    topics: usize,
    alpha: f64,
    beta: f64,
    inference_sweeps: usize,
    seed: u64,
    vocab: Vocabulary,
    word_topic: Vec<u32>,
    topic_totals: Vec<u64>,
}

#[derive(Clone, Copy)]
struct Priors {
    topics: usize,
    alpha: f64,
    beta: f64,
    vocab_beta: f64,
}

/// Draws a topic for one token. `row` holds the token's per-topic counts and
/// `doc_topic` the document's counts, both excluding the current assignment.
fn draw_topic(
    rng: &mut SeededRng,
    priors: Priors,
    row: &[u32],
    topic_totals: &[u64],
    doc_topic: &[u32],
    cumulative: &mut [f64],
) -> usize {
    let mut total = 0.0;
    for k in 0..priors.topics {
        total += (doc_topic[k] as f64 + priors.alpha) * (row[k] as f64 + priors.beta)
            / (topic_totals[k] as f64 + priors.vocab_beta);
        cumulative[k] = total;
    }
    let u = rng.random::<f64>() * total;
    cumulative.iter().position(|&c| u < c).unwrap_or(priors.topics - 1)
}

/// Trains LDA over the in-vocabulary tokens of `docs` for `config.iterations`
/// full Gibbs sweeps in corpus order. Documents with no in-vocabulary token
/// are skipped.
pub fn train_lda<'a, D, S>(docs: D, vocab: &Vocabulary, config: &LdaConfig) -> Result<LdaModel>
where
    D: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let k = config.topics;
    if k == 0 {
        return Err(Error::invalid("LDA needs at least one topic"));
    }
    if vocab.is_empty() {
        return Err(Error::invalid("LDA needs a non-empty vocabulary"));
    }
    let alpha = config.alpha.unwrap_or(50.0 / k as f64);
    if alpha <= 0.0 || config.beta <= 0.0 {
        return Err(Error::invalid("Dirichlet priors must be positive"));
    }
    let docs: Vec<Vec<usize>> = docs
        .into_iter()
        .map(|d| vocab.encode(d))
        .filter(|d| !d.is_empty())
        .collect();
    if docs.is_empty() {
        return Err(Error::invalid("LDA training corpus has no in-vocabulary tokens"));
    }

    let v = vocab.len();
    let mut rng = seeded_rng(config.seed);
    let mut word_topic = vec![0u32; v * k];
    let mut topic_totals = vec![0u64; k];
    let mut doc_topic = vec![0u32; docs.len() * k];
    let mut assignments: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
    for (d, doc) in docs.iter().enumerate() {
        let z: Vec<usize> = doc.iter().map(|_| rng.random_range(0..k)).collect();
        for (&w, &t) in doc.iter().zip(&z) {
            word_topic[w * k + t] += 1;
            topic_totals[t] += 1;
            doc_topic[d * k + t] += 1;
        }
        assignments.push(z);
    }

    let priors = Priors {
        topics: k,
        alpha,
        beta: config.beta,
        vocab_beta: v as f64 * config.beta,
    };
    let mut weights = vec![0.0; k];
    for _ in 0..config.iterations {
        for (d, doc) in docs.iter().enumerate() {
            let dt = &mut doc_topic[d * k..(d + 1) * k];
            for (i, &w) in doc.iter().enumerate() {
                let old = assignments[d][i];
                word_topic[w * k + old] -= 1;
                topic_totals[old] -= 1;
                dt[old] -= 1;
                let new = draw_topic(
                    &mut rng,
                    priors,
                    &word_topic[w * k..(w + 1) * k],
                    &topic_totals,
                    dt,
                    &mut weights,
                );
                word_topic[w * k + new] += 1;
                topic_totals[new] += 1;
                dt[new] += 1;
                assignments[d][i] = new;
            }
        }
    }

    Ok(LdaModel {
        topics: k,
        alpha,
        beta: config.beta,
        inference_sweeps: config.inference_sweeps,
        seed: config.seed,
        vocab: vocab.clone(),
        word_topic,
        topic_totals,
    })
}

impl LdaModel {
    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Smoothed word distribution of topic `k`.
    pub fn topic_word_distribution(&self, k: usize) -> ProbVector {
        let v = self.vocab.len();
        let denom = self.topic_totals[k] as f64 + v as f64 * self.beta;
        let values: Vec<f64> = (0..v)
            .map(|w| (self.word_topic[w * self.topics + k] as f64 + self.beta) / denom)
            .collect();
        ProbVector::from_counts(&values).unwrap_or_else(|_| ProbVector::uniform(v))
    }

    /// Raw topic assignment counts, word-major.
    pub fn word_topic_counts(&self) -> &[u32] {
        &self.word_topic
    }
}

/// Fold-in Gibbs inference with the topic-word counts held fixed. Returns the
/// final sweep's topic counts smoothed by `alpha`, so every entry is positive.
/// A document with no in-vocabulary token gets the uniform distribution.
pub fn infer_topics<S: AsRef<str>>(model: &LdaModel, tokens: &[S]) -> ProbVector {
    let k = model.topics;
    let doc = model.vocab.encode(tokens);
    if doc.is_empty() {
        return ProbVector::uniform(k);
    }
    let mut rng = seeded_rng(derive_seed(model.seed, INFERENCE_STREAM));
    let mut z: Vec<usize> = doc.iter().map(|_| rng.random_range(0..k)).collect();
    let mut dt = vec![0u32; k];
    for &t in &z {
        dt[t] += 1;
    }
    let priors = Priors {
        topics: k,
        alpha: model.alpha,
        beta: model.beta,
        vocab_beta: model.vocab.len() as f64 * model.beta,
    };
    let mut cumulative = vec![0.0; k];
    for _ in 0..model.inference_sweeps {
        for (i, &w) in doc.iter().enumerate() {
            dt[z[i]] -= 1;
            let row = &model.word_topic[w * k..(w + 1) * k];
            let t = draw_topic(&mut rng, priors, row, &model.topic_totals, &dt, &mut cumulative);
            dt[t] += 1;
            z[i] = t;
        }
    }
    let denom = doc.len() as f64 + k as f64 * model.alpha;
    let props: Vec<f64> = dt.iter().map(|&c| (c as f64 + model.alpha) / denom).collect();
    ProbVector::from_counts(&props).expect("alpha smoothing keeps every entry positive")
}
