//! Downstream tasks that turn a selected training set into the objective J.

mod sentiment;
mod tagger;
mod tfidf;

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::corpus::Example;
use crate::{Error, Result};

pub use sentiment::{train_sentiment, LinearClassifier, SentimentConfig};
pub use tagger::{train_tagger, train_tagger_traced, PerceptronTagger, TaggerConfig};
pub use tfidf::{fit_tfidf, ngrams, SparseVector, TfidfVectorizer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Sentiment,
    Pos,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Sentiment => "sentiment",
            TaskKind::Pos => "pos",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sentiment" => Some(TaskKind::Sentiment),
            "pos" | "tagging" => Some(TaskKind::Pos),
            _ => None,
        }
    }

    /// Sentiment training sets are balanced across classes.
    pub fn stratified(self) -> bool {
        self == TaskKind::Sentiment
    }
}

/// Trains a model on selected data and scores it on evaluation data.
/// Implementations must be deterministic for a fixed seed.
pub trait Task {
    fn kind(&self) -> TaskKind;

    fn name(&self) -> String {
        String::from(self.kind().name())
    }

    fn train_and_evaluate(&self, train: &[&Example], eval: &[&Example], seed: u64) -> Result<f64>;
}

pub enum TrainedModel {
    Sentiment(LinearClassifier),
    Tagger(PerceptronTagger),
}

/// Accuracy of `model` on `eval`: per example for sentiment, per token for
/// tagging.
pub fn evaluate(model: &TrainedModel, eval: &[&Example]) -> Result<f64> {
    if eval.is_empty() {
        return Err(Error::invalid("evaluation set is empty"));
    }
    let (mut correct, mut total) = (0usize, 0usize);
    for ex in eval {
        match model {
            TrainedModel::Sentiment(m) => {
                let gold = ex
                    .polarity()
                    .ok_or_else(|| Error::invalid(format!("example `{}` has no polarity", ex.id)))?;
                correct += usize::from(m.predict(&ex.tokens) == gold);
                total += 1;
            }
            TrainedModel::Tagger(m) => {
                let gold = ex
                    .tags()
                    .ok_or_else(|| Error::invalid(format!("sentence `{}` has no tags", ex.id)))?;
                let pred = m.tag(&ex.tokens);
                correct += pred.iter().zip(gold).filter(|(p, g)| p == g).count();
                total += gold.len();
            }
        }
    }
    Ok(correct as f64 / total as f64)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentTask {
    pub config: SentimentConfig,
}

impl Task for SentimentTask {
    fn kind(&self) -> TaskKind {
        TaskKind::Sentiment
    }

    fn train_and_evaluate(&self, train: &[&Example], eval: &[&Example], seed: u64) -> Result<f64> {
        let m = train_sentiment(train, &self.config, seed)?;
        evaluate(&TrainedModel::Sentiment(m), eval)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaggingTask {
    pub config: TaggerConfig,
}

impl Task for TaggingTask {
    fn kind(&self) -> TaskKind {
        TaskKind::Pos
    }

    fn train_and_evaluate(&self, train: &[&Example], eval: &[&Example], seed: u64) -> Result<f64> {
        let m = train_tagger(train, &self.config, seed)?;
        evaluate(&TrainedModel::Tagger(m), eval)
    }
}

/// Accuracy of always predicting each token's most frequent training tag
/// (the overall most frequent tag for unseen words).
pub fn majority_tag_accuracy(train: &[&Example], eval: &[&Example]) -> Result<f64> {
    use alloc::collections::BTreeMap;
    let mut per_word: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    let mut overall: BTreeMap<&str, usize> = BTreeMap::new();
    for s in train {
        let tags = s.tags().ok_or_else(|| Error::invalid("untagged training sentence"))?;
        for (w, t) in s.tokens.iter().zip(tags) {
            *per_word.entry(w).or_default().entry(t).or_default() += 1;
            *overall.entry(t).or_default() += 1;
        }
    }
    let most = |m: &BTreeMap<&str, usize>| -> Option<String> {
        let mut best: Option<(&str, usize)> = None;
        for (&t, &c) in m {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((t, c));
            }
        }
        best.map(|(t, _)| String::from(t))
    };
    let fallback = most(&overall).ok_or_else(|| Error::invalid("no training tags"))?;
    let (mut correct, mut total) = (0usize, 0usize);
    for s in eval {
        let tags = s.tags().ok_or_else(|| Error::invalid("untagged evaluation sentence"))?;
        for (w, t) in s.tokens.iter().zip(tags) {
            let guess = per_word.get(w.as_str()).and_then(most).unwrap_or_else(|| fallback.clone());
            correct += usize::from(&guess == t);
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::invalid("evaluation set is empty"));
    }
    Ok(correct as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Polarity};
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    fn review(id: &str, word: &str, p: Polarity) -> Example {
        Example::new(id, vec![word.to_string()], Some(Label::Sentiment(p)), "d").unwrap()
    }

    fn sentiment_data() -> Vec<Example> {
        vec![
            review("a", "good", Polarity::Positive),
            review("b", "bad", Polarity::Negative),
            review("c", "good", Polarity::Positive),
            review("d", "bad", Polarity::Negative),
        ]
    }

    #[test]
    fn perfect_model_scores_one() {
        let data = sentiment_data();
        let refs: Vec<&Example> = data.iter().collect();
        let acc = SentimentTask::default().train_and_evaluate(&refs, &refs, 0).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn constant_predictor_on_balanced_set() {
        let data = sentiment_data();
        let refs: Vec<&Example> = data.iter().collect();
        let m = train_sentiment(&refs, &SentimentConfig::default(), 0).unwrap();
        let unseen = [
            review("x", "meh", Polarity::Positive),
            review("y", "meh", Polarity::Negative),
        ];
        let eval: Vec<&Example> = unseen.iter().collect();
        assert_eq!(evaluate(&TrainedModel::Sentiment(m), &eval).unwrap(), 0.5);
    }

    #[test]
    fn pos_accuracy_counts_tokens() {
        let tagged = |id: &str, words: &[&str], tags: &[&str]| {
            Example::new(
                id,
                words.iter().map(|w| w.to_string()).collect(),
                Some(Label::Tags(tags.iter().map(|t| t.to_string()).collect())),
                "d",
            )
            .unwrap()
        };
        let train = [tagged("t", &["x", "y"], &["A", "B"])];
        let tr: Vec<&Example> = train.iter().collect();
        let m = train_tagger(&tr, &TaggerConfig::default(), 0).unwrap();
        let short = tagged("e1", &["x"], &["B"]);
        let long = tagged("e2", &["x", "y", "y", "y", "y", "y", "y", "y", "y"], &["A", "B", "B", "B", "B", "B", "B", "B", "B"]);
        assert_eq!(m.tag(&long.tokens), long.tags().unwrap());
        assert_eq!(m.tag(&short.tokens), ["A"]);
        let acc = evaluate(&TrainedModel::Tagger(m), &[&short, &long]).unwrap();
        assert!((acc - 0.9).abs() < 1e-15);
    }

    #[test]
    fn empty_eval_rejected() {
        let data = sentiment_data();
        let refs: Vec<&Example> = data.iter().collect();
        assert!(SentimentTask::default().train_and_evaluate(&refs, &[], 0).is_err());
    }

    #[test]
    fn wrong_label_kind_rejected() {
        let data = sentiment_data();
        let refs: Vec<&Example> = data.iter().collect();
        assert!(TaggingTask::default().train_and_evaluate(&refs, &refs, 0).is_err());
    }
}
