use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Example;
use crate::{seeded_rng, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaggerConfig {
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            iterations: 5,
            learning_rate: 0.2,
        }
    }
}

const START: &str = "<s>";
const END: &str = "</s>";

fn static_features(words: &[String], i: usize) -> Vec<String> {
    let w = words[i].as_str();
    let lower = w.to_lowercase();
    let mut f = vec![
        "bias".to_string(),
        format!("w={w}"),
        format!("l={lower}"),
        format!("pw={}", if i > 0 { words[i - 1].as_str() } else { START }),
        format!("nw={}", words.get(i + 1).map_or(END, String::as_str)),
    ];
    if w.chars().next().is_some_and(char::is_uppercase) {
        f.push("cap".to_string());
    }
    if w.chars().any(|c| c.is_ascii_digit()) {
        f.push("digit".to_string());
    }
    let chars: Vec<char> = lower.chars().collect();
    for k in 1..=3.min(chars.len()) {
        let pre: String = chars[..k].iter().collect();
        let suf: String = chars[chars.len() - k..].iter().collect();
        f.push(format!("p{k}={pre}"));
        f.push(format!("s{k}={suf}"));
    }
    f
}

fn tag_feature(prev: Option<&str>) -> String {
    format!("pt={}", prev.unwrap_or(START))
}

/// Greedy left-to-right tagger with averaged perceptron weights.
#[derive(Clone, Debug)]
pub struct PerceptronTagger {
    tags: Vec<String>,
    features: HashMap<String, u32>,
    /// Row-major `features × tags`.
    weights: Vec<f64>,
}

impl PerceptronTagger {
    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    fn best_tag(&self, feats: &[u32], prev_feat: Option<u32>) -> usize {
        let t = self.tags.len();
        let mut scores = vec![0.0; t];
        for &f in feats.iter().chain(prev_feat.as_ref()) {
            let row = &self.weights[f as usize * t..(f as usize + 1) * t];
            for (s, w) in scores.iter_mut().zip(row) {
                *s += w;
            }
        }
        argmax(&scores)
    }

    pub fn tag<S: AsRef<str>>(&self, words: &[S]) -> Vec<String> {
        let words: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
        let mut out: Vec<String> = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            let feats: Vec<u32> = static_features(&words, i)
                .iter()
                .filter_map(|f| self.features.get(f).copied())
                .collect();
            let prev = self.features.get(&tag_feature(out.last().map(String::as_str))).copied();
            out.push(self.tags[self.best_tag(&feats, prev)].clone());
        }
        out
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

struct Sentence {
    feats: Vec<Vec<u32>>,
    gold: Vec<usize>,
}

/// Trains with per-iteration seeded shuffling. The previous-tag feature
/// uses the tagger's own predictions, as at test time.
pub fn train_tagger(sentences: &[&Example], config: &TaggerConfig, seed: u64) -> Result<PerceptronTagger> {
    train(sentences, config, seed, false).map(|(t, _)| t)
}

/// As [`train_tagger`], also returning the training-set accuracy of the
/// averaged weights after each iteration.
pub fn train_tagger_traced(
    sentences: &[&Example],
    config: &TaggerConfig,
    seed: u64,
) -> Result<(PerceptronTagger, Vec<f64>)> {
    train(sentences, config, seed, true)
}

fn train(
    sentences: &[&Example],
    config: &TaggerConfig,
    seed: u64,
    traced: bool,
) -> Result<(PerceptronTagger, Vec<f64>)> {
    if sentences.is_empty() {
        return Err(Error::invalid("cannot train a tagger on zero sentences"));
    }
    if config.iterations == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::invalid("invalid tagger configuration"));
    }
    let mut tagset = BTreeSet::new();
    for s in sentences {
        let tags = s
            .tags()
            .ok_or_else(|| Error::invalid(format!("sentence `{}` has no tags", s.id)))?;
        tagset.extend(tags.iter().cloned());
    }
    let tags: Vec<String> = tagset.into_iter().collect();
    let tag_index: HashMap<&str, usize> = tags.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let mut features: HashMap<String, u32> = HashMap::new();
    let intern = |f: String, features: &mut HashMap<String, u32>| -> u32 {
        let next = features.len() as u32;
        *features.entry(f).or_insert(next)
    };
    let prev_ids: Vec<u32> = core::iter::once(tag_feature(None))
        .chain(tags.iter().map(|t| tag_feature(Some(t))))
        .map(|f| intern(f, &mut features))
        .collect();
    let mut data: Vec<(&str, Sentence)> = Vec::with_capacity(sentences.len());
    for s in sentences {
        let feats = (0..s.tokens.len())
            .map(|i| {
                static_features(&s.tokens, i)
                    .into_iter()
                    .map(|f| intern(f, &mut features))
                    .collect()
            })
            .collect();
        let gold = s.tags().unwrap_or_default().iter().map(|t| tag_index[t.as_str()]).collect();
        data.push((s.id.as_str(), Sentence { feats, gold }));
    }
    data.sort_by(|a, b| a.0.cmp(b.0));
    drop(tag_index);

    let t = tags.len();
    let n_feat = features.len();
    let mut model = PerceptronTagger {
        tags,
        features,
        weights: vec![0.0; n_feat * t],
    };
    let mut totals = vec![0.0; n_feat * t];
    let mut stamps = vec![0u64; n_feat * t];
    let mut clock = 0u64;
    let mut trace = Vec::with_capacity(config.iterations);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = seeded_rng(seed);
    let lr = config.learning_rate;

    for _ in 0..config.iterations {
        order.shuffle(&mut rng);
        for &si in &order {
            let sent = &data[si].1;
            let mut prev: usize = 0;
            for (i, feats) in sent.feats.iter().enumerate() {
                clock += 1;
                let prev_feat = prev_ids[prev];
                let guess = model.best_tag(feats, Some(prev_feat));
                let gold = sent.gold[i];
                if guess != gold {
                    for &f in feats.iter().chain(core::iter::once(&prev_feat)) {
                        for (tag, delta) in [(gold, lr), (guess, -lr)] {
                            let k = f as usize * t + tag;
                            totals[k] += (clock - stamps[k]) as f64 * model.weights[k];
                            stamps[k] = clock;
                            model.weights[k] += delta;
                        }
                    }
                }
                prev = guess + 1;
            }
        }
        if !traced {
            continue;
        }
        let averaged = average(&model, &totals, &stamps, clock);
        let (correct, total) = data.iter().fold((0usize, 0usize), |(c, n), (_, s)| {
            let (sc, sn) = score_sentence(&averaged, s, &prev_ids);
            (c + sc, n + sn)
        });
        trace.push(correct as f64 / total as f64);
    }
    let averaged = average(&model, &totals, &stamps, clock);
    Ok((averaged, trace))
}

fn average(model: &PerceptronTagger, totals: &[f64], stamps: &[u64], clock: u64) -> PerceptronTagger {
    let weights = model
        .weights
        .iter()
        .zip(totals)
        .zip(stamps)
        .map(|((w, tot), &st)| (tot + (clock - st) as f64 * w) / clock as f64)
        .collect();
    PerceptronTagger {
        tags: model.tags.clone(),
        features: model.features.clone(),
        weights,
    }
}

fn score_sentence(model: &PerceptronTagger, s: &Sentence, prev_ids: &[u32]) -> (usize, usize) {
    let mut prev = 0;
    let mut correct = 0;
    for (i, feats) in s.feats.iter().enumerate() {
        let guess = model.best_tag(feats, Some(prev_ids[prev]));
        if guess == s.gold[i] {
            correct += 1;
        }
        prev = guess + 1;
    }
    (correct, s.gold.len())
}
