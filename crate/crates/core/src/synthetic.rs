//! Synthetic multi-domain corpora for tests, demos and the acceptance suite.
//!
//! Sentiment: one target and three sources. Documents mix shared function
//! words, domain topic words and sentiment cue words; the cue density varies
//! per document. `near` shares the target's topics and domain-specific cues,
//! `mid` shares half of its topics, and `far` uses unrelated topics and
//! flips the polarity of the generic cue words.
//!
//! Tagging: sentences from a small template grammar over tag-specific
//! lexicons with suffix cues, some shared ambiguous words and per-domain
//! vocabulary.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{DomainCorpus, Example, Label, Polarity};
use crate::rng::derive_seed;
use crate::{seeded_rng, Result, SeededRng};

const SYLLABLES: [&str; 24] = [
    "ba", "ko", "ri", "mu", "te", "la", "no", "si", "da", "fe", "gu", "ho", "ja", "ki", "lo", "me", "na", "po", "ru",
    "sa", "tu", "vi", "wo", "ze",
];

const FUNCTION_WORDS: [&str; 15] = [
    "the", "a", "and", "of", "to", "is", "it", "this", "that", "was", "for", "with", "on", "as", "but",
];

/// Draws `count` fresh pseudo-words, none of which is in `used`.
fn fresh_words(rng: &mut SeededRng, count: usize, suffix: &str, used: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.random_range(2..=3);
        let mut w: String = (0..k).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        w.push_str(suffix);
        if used.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Index drawn with probability proportional to `1 / (i + 1)`.
fn zipf_index(rng: &mut SeededRng, len: usize) -> usize {
    let h: f64 = (1..=len).map(|i| 1.0 / i as f64).sum();
    let mut u = rng.random::<f64>() * h;
    for i in 0..len {
        u -= 1.0 / (i + 1) as f64;
        if u <= 0.0 {
            return i;
        }
    }
    len - 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SentimentBenchmarkConfig {
    pub target_labeled: usize,
    pub target_unlabeled: usize,
    pub source_labeled: usize,
    pub source_unlabeled: usize,
    pub min_length: usize,
    pub max_length: usize,
    /// Upper bound of the per-document cue density.
    pub max_cue_density: f64,
    /// Probability that a cue token agrees with the document label.
    pub cue_reliability: f64,
    pub seed: u64,
}

impl Default for SentimentBenchmarkConfig {
    fn default() -> Self {
        SentimentBenchmarkConfig {
            target_labeled: 600,
            target_unlabeled: 300,
            source_labeled: 500,
            source_unlabeled: 100,
            min_length: 20,
            max_length: 60,
            max_cue_density: 0.35,
            cue_reliability: 0.8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub target: DomainCorpus,
    pub sources: Vec<DomainCorpus>,
}

impl Benchmark {
    pub fn all(&self) -> Vec<DomainCorpus> {
        self.sources.iter().cloned().chain([self.target.clone()]).collect()
    }
}

struct CueSet {
    positive: Vec<String>,
    negative: Vec<String>,
}

impl CueSet {
    fn new(rng: &mut SeededRng, size: usize, used: &mut BTreeSet<String>) -> Self {
        CueSet {
            positive: fresh_words(rng, size, "", used),
            negative: fresh_words(rng, size, "", used),
        }
    }

    fn side(&self, p: Polarity) -> &[String] {
        match p {
            Polarity::Positive => &self.positive,
            Polarity::Negative => &self.negative,
        }
    }
}

struct DomainSpec<'a> {
    name: &'a str,
    topics: Vec<String>,
    specific: &'a CueSet,
    generic_inverted: bool,
}

fn flip(p: Polarity) -> Polarity {
    match p {
        Polarity::Positive => Polarity::Negative,
        Polarity::Negative => Polarity::Positive,
    }
}

fn review(rng: &mut SeededRng, spec: &DomainSpec, generic: &CueSet, label: Polarity, cfg: &SentimentBenchmarkConfig) -> Vec<String> {
    let len = rng.random_range(cfg.min_length..=cfg.max_length);
    let density = rng.random::<f64>() * cfg.max_cue_density;
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < density {
                let agrees = rng.random::<f64>() < cfg.cue_reliability;
                let shown = if agrees { label } else { flip(label) };
                if rng.random::<f64>() < 0.5 {
                    spec.specific.side(shown).choose(rng).expect("cues").clone()
                } else {
                    let side = if spec.generic_inverted { flip(shown) } else { shown };
                    generic.side(side).choose(rng).expect("cues").clone()
                }
            } else if rng.random::<f64>() < 0.3 {
                FUNCTION_WORDS.choose(rng).expect("words").to_string()
            } else {
                spec.topics[zipf_index(rng, spec.topics.len())].clone()
            }
        })
        .collect()
}

fn sentiment_domain(
    rng: &mut SeededRng,
    spec: &DomainSpec,
    generic: &CueSet,
    labeled: usize,
    unlabeled: usize,
    cfg: &SentimentBenchmarkConfig,
) -> Result<DomainCorpus> {
    let mut lab = Vec::with_capacity(labeled);
    for i in 0..labeled {
        let p = if i % 2 == 0 { Polarity::Positive } else { Polarity::Negative };
        let tokens = review(rng, spec, generic, p, cfg);
        lab.push(Example::new(format!("{}:{i}", spec.name), tokens, Some(Label::Sentiment(p)), spec.name)?);
    }
    let mut unl = Vec::with_capacity(unlabeled);
    for i in 0..unlabeled {
        let p = if rng.random::<bool>() { Polarity::Positive } else { Polarity::Negative };
        let tokens = review(rng, spec, generic, p, cfg);
        unl.push(Example::new(format!("{}:u{i}", spec.name), tokens, None, spec.name)?);
    }
    DomainCorpus::new(spec.name, lab, unl)
}

/// Target `target` with sources `near`, `mid` and `far` (see module docs).
pub fn sentiment_benchmark(cfg: &SentimentBenchmarkConfig) -> Result<Benchmark> {
    let mut rng = seeded_rng(derive_seed(cfg.seed, 0x5e47));
    let mut used: BTreeSet<String> = FUNCTION_WORDS.iter().map(|w| w.to_string()).collect();
    let target_topics = fresh_words(&mut rng, 150, "", &mut used);
    let mid_own = fresh_words(&mut rng, 75, "", &mut used);
    let far_topics = fresh_words(&mut rng, 150, "", &mut used);
    let generic = CueSet::new(&mut rng, 40, &mut used);
    let shared_specific = CueSet::new(&mut rng, 20, &mut used);
    let mid_specific = CueSet::new(&mut rng, 20, &mut used);
    let far_specific = CueSet::new(&mut rng, 20, &mut used);

    let mid_topics: Vec<String> = target_topics.iter().step_by(2).cloned().chain(mid_own).collect();
    let specs = [
        DomainSpec {
            name: "target",
            topics: target_topics.clone(),
            specific: &shared_specific,
            generic_inverted: false,
        },
        DomainSpec {
            name: "near",
            topics: target_topics,
            specific: &shared_specific,
            generic_inverted: false,
        },
        DomainSpec {
            name: "mid",
            topics: mid_topics,
            specific: &mid_specific,
            generic_inverted: false,
        },
        DomainSpec {
            name: "far",
            topics: far_topics,
            specific: &far_specific,
            generic_inverted: true,
        },
    ];
    let target = sentiment_domain(&mut rng, &specs[0], &generic, cfg.target_labeled, cfg.target_unlabeled, cfg)?;
    let sources = specs[1..]
        .iter()
        .map(|s| sentiment_domain(&mut rng, s, &generic, cfg.source_labeled, cfg.source_unlabeled, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Benchmark { target, sources })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PosBenchmarkConfig {
    pub target_sentences: usize,
    pub source_sentences: usize,
    pub unlabeled: usize,
    pub sources: usize,
    /// Probability of using a shared ambiguous word in a noun or verb slot.
    pub ambiguity: f64,
    pub seed: u64,
}

impl Default for PosBenchmarkConfig {
    fn default() -> Self {
        PosBenchmarkConfig {
            target_sentences: 300,
            source_sentences: 300,
            unlabeled: 100,
            sources: 3,
            ambiguity: 0.15,
            seed: 0,
        }
    }
}

struct Lexicon {
    nouns: Vec<String>,
    verbs: Vec<String>,
    adjectives: Vec<String>,
    adverbs: Vec<String>,
}

const NOUN_SUFFIXES: [&str; 4] = ["tion", "ment", "ness", "er"];
const VERB_SUFFIXES: [&str; 4] = ["es", "ed", "ize", "ing"];
const ADJ_SUFFIXES: [&str; 4] = ["ous", "ful", "ive", "al"];
const AMBIGUOUS: [&str; 6] = ["run", "light", "watch", "play", "ship", "mark"];
const DETERMINERS: [&str; 4] = ["the", "a", "this", "every"];
const PRONOUNS: [&str; 4] = ["she", "they", "we", "he"];
const PREPOSITIONS: [&str; 5] = ["in", "on", "with", "near", "under"];

impl Lexicon {
    fn new(rng: &mut SeededRng, used: &mut BTreeSet<String>, size: usize) -> Self {
        let mut by = |suffixes: &[&str]| -> Vec<String> {
            suffixes
                .iter()
                .flat_map(|s| fresh_words(rng, size, s, used))
                .collect()
        };
        Lexicon {
            nouns: by(&NOUN_SUFFIXES),
            verbs: by(&VERB_SUFFIXES),
            adjectives: by(&ADJ_SUFFIXES),
            adverbs: by(&["ly"]),
        }
    }
}

fn pick<'a>(rng: &mut SeededRng, shared: &'a [String], own: &'a [String]) -> &'a str {
    let list = if rng.random::<f64>() < 0.5 { shared } else { own };
    &list[zipf_index(rng, list.len())]
}

fn tagged_sentence(
    rng: &mut SeededRng,
    shared: &Lexicon,
    own: &Lexicon,
    ambiguity: f64,
) -> (Vec<String>, Vec<String>) {
    let mut words: Vec<String> = Vec::new();
    let mut tags: Vec<String> = Vec::new();
    let mut push = |w: &str, t: &str| {
        words.push(w.to_string());
        tags.push(t.to_string());
    };
    let noun_phrase = |rng: &mut SeededRng, push: &mut dyn FnMut(&str, &str)| {
        if rng.random::<f64>() < 0.2 {
            push(&format!("{}", rng.random_range(2..100)), "CD");
        } else {
            push(DETERMINERS.choose(rng).expect("det"), "DT");
        }
        if rng.random::<f64>() < 0.4 {
            push(pick(rng, &shared.adjectives, &own.adjectives), "JJ");
        }
        if rng.random::<f64>() < ambiguity {
            push(AMBIGUOUS.choose(rng).expect("amb"), "NN");
        } else {
            push(pick(rng, &shared.nouns, &own.nouns), "NN");
        }
    };
    if rng.random::<f64>() < 0.3 {
        push(PRONOUNS.choose(rng).expect("prp"), "PRP");
    } else {
        noun_phrase(rng, &mut push);
    }
    if rng.random::<f64>() < ambiguity {
        push(AMBIGUOUS.choose(rng).expect("amb"), "VB");
    } else {
        push(pick(rng, &shared.verbs, &own.verbs), "VB");
    }
    if rng.random::<f64>() < 0.6 {
        noun_phrase(rng, &mut push);
    }
    if rng.random::<f64>() < 0.3 {
        push(pick(rng, &shared.adverbs, &own.adverbs), "RB");
    }
    if rng.random::<f64>() < 0.4 {
        push(PREPOSITIONS.choose(rng).expect("prep"), "IN");
        noun_phrase(rng, &mut push);
    }
    push(".", ".");
    let mut first = words[0].clone();
    if let Some(c) = first.get(..1) {
        first = c.to_uppercase() + &first[1..];
    }
    words[0] = first;
    (words, tags)
}

fn pos_domain(
    rng: &mut SeededRng,
    name: &str,
    shared: &Lexicon,
    own: &Lexicon,
    labeled: usize,
    unlabeled: usize,
    ambiguity: f64,
) -> Result<DomainCorpus> {
    let mut lab = Vec::with_capacity(labeled);
    for i in 0..labeled {
        let (w, t) = tagged_sentence(rng, shared, own, ambiguity);
        lab.push(Example::new(format!("{name}:{i}"), w, Some(Label::Tags(t)), name)?);
    }
    let mut unl = Vec::with_capacity(unlabeled);
    for i in 0..unlabeled {
        let (w, _) = tagged_sentence(rng, shared, own, ambiguity);
        unl.push(Example::new(format!("{name}:u{i}"), w, None, name)?);
    }
    DomainCorpus::new(name, lab, unl)
}

/// A tagged corpus for a single domain.
pub fn tagged_corpus(name: &str, sentences: usize, seed: u64) -> Result<DomainCorpus> {
    let mut rng = seeded_rng(derive_seed(seed, 0x7a9));
    let mut used = BTreeSet::new();
    let shared = Lexicon::new(&mut rng, &mut used, 15);
    let own = Lexicon::new(&mut rng, &mut used, 25);
    pos_domain(&mut rng, name, &shared, &own, sentences, 0, 0.15)
}

/// Target `target` and sources `src0`, `src1`, ... with per-domain lexicons.
pub fn pos_benchmark(cfg: &PosBenchmarkConfig) -> Result<Benchmark> {
    let mut rng = seeded_rng(derive_seed(cfg.seed, 0x9a5));
    let mut used = BTreeSet::new();
    let shared = Lexicon::new(&mut rng, &mut used, 15);
    let own: Vec<Lexicon> = (0..=cfg.sources).map(|_| Lexicon::new(&mut rng, &mut used, 20)).collect();
    let target = pos_domain(&mut rng, "target", &shared, &own[0], cfg.target_sentences, cfg.unlabeled, cfg.ambiguity)?;
    let sources = (0..cfg.sources)
        .map(|k| {
            pos_domain(
                &mut rng,
                &format!("src{k}"),
                &shared,
                &own[k + 1],
                cfg.source_sentences,
                cfg.unlabeled,
                cfg.ambiguity,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Benchmark { target, sources })
}
