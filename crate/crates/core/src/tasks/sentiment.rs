use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::tfidf::{fit_tfidf, SparseVector, TfidfVectorizer};
use crate::corpus::{Example, Polarity};
use crate::{seeded_rng, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SentimentConfig {
    pub max_features: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// L2 strength.
    pub lambda: f64,
}

impl Default for SentimentConfig {
    fn default() -> Self {
        SentimentConfig {
            max_features: 10_000,
            epochs: 10,
            learning_rate: 0.1,
            lambda: 1e-4,
        }
    }
}

/// Linear model over tf-idf features trained with the hinge loss.
#[derive(Clone, Debug)]
pub struct LinearClassifier {
    vectorizer: TfidfVectorizer,
    weights: Vec<f64>,
    bias: f64,
}

impl LinearClassifier {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn vectorizer(&self) -> &TfidfVectorizer {
        &self.vectorizer
    }

    pub fn decision<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        self.vectorizer.transform(tokens).dot(&self.weights) + self.bias
    }

    /// Positive iff the decision value is strictly positive.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> Polarity {
        if self.decision(tokens) > 0.0 {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }
}

/// SGD on the L2-regularized hinge loss. Examples are put in id order and
/// then shuffled with `seed` every epoch, so the result depends only on the
/// set of examples and the seed. The returned weights are the average of
/// the end-of-epoch iterates.
pub fn train_sentiment(examples: &[&Example], config: &SentimentConfig, seed: u64) -> Result<LinearClassifier> {
    if config.epochs == 0 || !(config.learning_rate > 0.0) || !(config.lambda >= 0.0) {
        return Err(Error::invalid("invalid sentiment training configuration"));
    }
    let mut data: Vec<(&Example, f64)> = Vec::with_capacity(examples.len());
    for ex in examples {
        let p = ex
            .polarity()
            .ok_or_else(|| Error::invalid(alloc::format!("example `{}` has no polarity label", ex.id)))?;
        data.push((ex, p.sign()));
    }
    let positives = data.iter().filter(|(_, y)| *y > 0.0).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::invalid("sentiment training needs both classes"));
    }
    data.sort_by(|a, b| a.0.id.cmp(&b.0.id));

    let vectorizer = fit_tfidf(data.iter().map(|(e, _)| e.tokens.as_slice()), config.max_features)?;
    let xs: Vec<(SparseVector, f64)> = data.iter().map(|(e, y)| (vectorizer.transform(&e.tokens), *y)).collect();
    let dim = vectorizer.len();

    // w = scale · v keeps the per-step decay O(1)
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut bias = 0.0;
    let mut avg_w = vec![0.0; dim];
    let mut avg_b = 0.0;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = seeded_rng(seed);
    let decay = 1.0 - config.learning_rate * config.lambda;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, y) = &xs[i];
            let margin = y * (scale * x.dot(&v) + bias);
            scale *= decay;
            if margin < 1.0 {
                let step = config.learning_rate * y / scale;
                for (&j, val) in x.indices.iter().zip(&x.values) {
                    v[j as usize] += step * val;
                }
                bias += config.learning_rate * y;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|a| *a *= scale);
                scale = 1.0;
            }
        }
        for (a, b) in avg_w.iter_mut().zip(&v) {
            *a += scale * b;
        }
        avg_b += bias;
    }
    let k = config.epochs as f64;
    avg_w.iter_mut().for_each(|a| *a /= k);
    Ok(LinearClassifier {
        vectorizer,
        weights: avg_w,
        bias: avg_b / k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Label};
    use alloc::format;

    fn review(i: usize, text: &str, p: Polarity) -> Example {
        Example::new(format!("d:{i}"), tokenize(text, true), Some(Label::Sentiment(p)), "d").unwrap()
    }

    fn toy() -> Vec<Example> {
        let mut out = Vec::new();
        for i in 0..10 {
            let filler = ["the plot", "a story", "this film", "the cast", "my evening"][i % 5];
            out.push(review(2 * i, &format!("{filler} was good"), Polarity::Positive));
            out.push(review(2 * i + 1, &format!("{filler} was bad"), Polarity::Negative));
        }
        out
    }

    #[test]
    fn separable_toy_set() {
        let data = toy();
        let refs: Vec<&Example> = data.iter().collect();
        let m = train_sentiment(&refs, &SentimentConfig::default(), 0).unwrap();
        for e in &data {
            assert_eq!(m.predict(&e.tokens), e.polarity().unwrap());
        }
    }

    #[test]
    fn same_seed_same_weights_any_order() {
        let data = toy();
        let refs: Vec<&Example> = data.iter().collect();
        let rev: Vec<&Example> = data.iter().rev().collect();
        let a = train_sentiment(&refs, &SentimentConfig::default(), 7).unwrap();
        let b = train_sentiment(&rev, &SentimentConfig::default(), 7).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert_eq!(a.bias(), b.bias());
    }

    #[test]
    fn empty_doc_uses_bias() {
        let mut data = toy();
        data.push(review(100, "good good", Polarity::Positive));
        let refs: Vec<&Example> = data.iter().collect();
        let m = train_sentiment(&refs, &SentimentConfig::default(), 1).unwrap();
        let expected = if m.bias() > 0.0 { Polarity::Positive } else { Polarity::Negative };
        assert_eq!(m.predict(&["unseen"]), expected);
        assert_eq!(m.decision(&["unseen"]), m.bias());
    }

    #[test]
    fn single_class_rejected() {
        let data = [review(0, "good", Polarity::Positive), review(1, "fine", Polarity::Positive)];
        let refs: Vec<&Example> = data.iter().collect();
        assert!(train_sentiment(&refs, &SentimentConfig::default(), 0).is_err());
        assert!(train_sentiment(&[], &SentimentConfig::default(), 0).is_err());
    }
}
