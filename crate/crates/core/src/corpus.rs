//! Multi-domain examples, vocabularies and validation splits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::{seeded_rng, Error, Result};

/// Sentiment polarity of a review.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    pub fn from_digit(d: &str) -> Option<Self> {
        match d {
            "0" => Some(Polarity::Negative),
            "1" => Some(Polarity::Positive),
            _ => None,
        }
    }

    pub fn as_digit(self) -> char {
        match self {
            Polarity::Negative => '0',
            Polarity::Positive => '1',
        }
    }

    /// `+1.0` for positive, `-1.0` for negative.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Negative => -1.0,
            Polarity::Positive => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Label {
    Sentiment(Polarity),
    Tags(Vec<String>),
}

/// One training unit: a review or a tagged sentence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: Option<Label>,
    pub domain: String,
}

impl Example {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        label: Option<Label>,
        domain: impl Into<String>,
    ) -> Result<Self> {
        let id = id.into();
        if tokens.is_empty() {
            return Err(Error::invalid(format!("example `{id}` has no tokens")));
        }
        if let Some(Label::Tags(tags)) = &label {
            if tags.len() != tokens.len() {
                return Err(Error::invalid(format!(
                    "example `{id}` has {} tokens but {} tags",
                    tokens.len(),
                    tags.len()
                )));
            }
        }
        Ok(Example {
            id,
            tokens,
            label,
            domain: domain.into(),
        })
    }

    pub fn polarity(&self) -> Option<Polarity> {
        match self.label {
            Some(Label::Sentiment(p)) => Some(p),
            _ => None,
        }
    }

    pub fn tags(&self) -> Option<&[String]> {
        match &self.label {
            Some(Label::Tags(t)) => Some(t),
            _ => None,
        }
    }
}

/// All labeled and unlabeled text of one domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainCorpus {
    pub domain: String,
    pub labeled: Vec<Example>,
    pub unlabeled: Vec<Example>,
}

impl DomainCorpus {
    pub fn new(domain: impl Into<String>, labeled: Vec<Example>, unlabeled: Vec<Example>) -> Result<Self> {
        let domain = domain.into();
        let mut seen = hashbrown::HashSet::new();
        for ex in labeled.iter().chain(unlabeled.iter()) {
            if ex.domain != domain {
                return Err(Error::invalid(format!(
                    "example `{}` belongs to domain `{}`, not `{domain}`",
                    ex.id, ex.domain
                )));
            }
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::invalid(format!("duplicate example id `{}`", ex.id)));
            }
        }
        drop(seen);
        Ok(DomainCorpus {
            domain,
            labeled,
            unlabeled,
        })
    }

    pub fn all_examples(&self) -> impl Iterator<Item = &Example> {
        self.labeled.iter().chain(&self.unlabeled)
    }
}

/// Splits on Unicode whitespace, optionally lowercasing first. Punctuation is kept.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    if lowercase {
        text.to_lowercase().split_whitespace().map(ToString::to_string).collect()
    } else {
        text.split_whitespace().map(ToString::to_string).collect()
    }
}

/// Word types with dense indices and corpus probabilities `p(w)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    types: Vec<String>,
    counts: Vec<u64>,
    probs: Vec<f64>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    types: Vec<String>,
    counts: Vec<u64>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_counts(r.types.into_iter().zip(r.counts).collect())
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            types: v.types,
            counts: v.counts,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.types == other.types && self.counts == other.counts
    }
}

impl Vocabulary {
    /// Builds a vocabulary from `(type, count)` pairs, keeping the given order.
    pub fn from_counts(entries: Vec<(String, u64)>) -> Self {
        let total: u64 = entries.iter().map(|(_, c)| *c).sum();
        let mut types = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (t, c)) in entries.into_iter().enumerate() {
            index.insert(t.clone(), i);
            types.push(t);
            counts.push(c);
        }
        let probs = counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect();
        Vocabulary {
            types,
            counts,
            probs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.types[idx]
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, word: &str) -> Option<f64> {
        self.index_of(word).map(|i| self.probs[i])
    }

    /// Maps tokens to vocabulary indices, dropping out-of-vocabulary tokens.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.index_of(t.as_ref())).collect()
    }
}

/// Keeps the `max_size` most frequent types over all labeled and unlabeled
/// tokens, ties broken lexicographically.
pub fn build_vocabulary(corpora: &[DomainCorpus], max_size: usize) -> Result<Vocabulary> {
    if corpora.is_empty() {
        return Err(Error::invalid("no corpora to build a vocabulary from"));
    }
    if max_size == 0 {
        return Err(Error::invalid("vocabulary size must be positive"));
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for ex in corpora.iter().flat_map(DomainCorpus::all_examples) {
        for t in &ex.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(&str, u64)> = counts.into_iter().collect();
    // BTreeMap order is lexicographic already; the stable sort keeps it for ties.
    entries.sort_by(|a, b| b.1.cmp(&a.1));
    entries.truncate(max_size);
    Ok(Vocabulary::from_counts(
        entries.into_iter().map(|(t, c)| (t.to_string(), c)).collect(),
    ))
}

/// Target-domain validation examples and the remaining labeled pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub validation: Vec<Example>,
    pub pool: Vec<Example>,
}

/// Samples `size` labeled examples uniformly without replacement as validation.
pub fn split_validation(corpus: &DomainCorpus, size: usize, seed: u64) -> Result<Split> {
    let n = corpus.labeled.len();
    if size > n {
        return Err(Error::Insufficient {
            what: "labeled examples for the validation split",
            needed: size,
            available: n,
        });
    }
    let mut rng = seeded_rng(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, n, size).into_vec();
    chosen.sort_unstable();
    let mut in_validation = alloc::vec![false; n];
    for &i in &chosen {
        in_validation[i] = true;
    }
    let validation = chosen.iter().map(|&i| corpus.labeled[i].clone()).collect();
    let pool = corpus
        .labeled
        .iter()
        .zip(&in_validation)
        .filter(|(_, &v)| !v)
        .map(|(e, _)| e.clone())
        .collect();
    Ok(Split { validation, pool })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ex(id: &str, toks: &[&str]) -> Example {
        Example::new(id, toks.iter().map(|s| s.to_string()).collect(), None, "d").unwrap()
    }

    fn labeled(n: usize) -> DomainCorpus {
        let labeled = (0..n)
            .map(|i| {
                let mut e = ex(&format!("d:{i}"), &["w"]);
                e.label = Some(Label::Sentiment(if i % 2 == 0 {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                }));
                e
            })
            .collect();
        DomainCorpus::new("d", labeled, vec![]).unwrap()
    }

    #[test]
    fn tokenize_cases() {
        assert_eq!(tokenize("Great DVD !", true), vec!["great", "dvd", "!"]);
        assert!(tokenize("", true).is_empty());
        assert_eq!(tokenize("a  b", false), vec!["a", "b"]);
        assert_eq!(tokenize("A\u{2003}B", false), vec!["A", "B"]);
    }

    #[test]
    fn example_invariants() {
        assert!(Example::new("x", vec![], None, "d").is_err());
        let tags = Label::Tags(vec!["NOUN".into()]);
        assert!(Example::new("x", vec!["a".into(), "b".into()], Some(tags), "d").is_err());
    }

    #[test]
    fn corpus_rejects_foreign_domain_and_duplicates() {
        let mut e = ex("a", &["x"]);
        e.domain = "other".into();
        assert!(DomainCorpus::new("d", vec![e], vec![]).is_err());
        assert!(DomainCorpus::new("d", vec![ex("a", &["x"])], vec![ex("a", &["y"])]).is_err());
    }

    #[test]
    fn vocabulary_truncates_by_frequency() {
        let c = DomainCorpus::new("d", vec![ex("1", &["a", "a", "a", "b", "b", "c"])], vec![]).unwrap();
        let v = build_vocabulary(&[c], 2).unwrap();
        assert_eq!(v.types(), &["a".to_string(), "b".to_string()]);
        assert!((v.probabilities()[0] - 0.6).abs() < 1e-12);
        assert!((v.probabilities()[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn vocabulary_keeps_everything_when_large() {
        let c = DomainCorpus::new("d", vec![ex("1", &["a", "b"])], vec![ex("2", &["c", "a"])]).unwrap();
        let v = build_vocabulary(&[c], 100).unwrap();
        assert_eq!(v.len(), 3);
        let s: f64 = v.probabilities().iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vocabulary_tie_break_is_lexicographic() {
        let c = DomainCorpus::new("d", vec![ex("1", &["zeta", "alpha", "mid"])], vec![]).unwrap();
        let v = build_vocabulary(&[c], 1).unwrap();
        assert_eq!(v.types(), &["alpha".to_string()]);
    }

    #[test]
    fn vocabulary_rejects_bad_input() {
        assert!(build_vocabulary(&[], 5).is_err());
        let c = DomainCorpus::new("d", vec![ex("1", &["a"])], vec![]).unwrap();
        assert!(build_vocabulary(&[c], 0).is_err());
    }

    #[test]
    fn vocabulary_serde_rebuilds_index() {
        let c = DomainCorpus::new("d", vec![ex("1", &["a", "b", "b"])], vec![]).unwrap();
        let v = build_vocabulary(&[c], 10).unwrap();
        let s = serde_json_like(&v);
        assert_eq!(s.index_of("a"), Some(1));
        assert_eq!(s, v);
    }

    // Round trip through the serde data model without pulling in a format crate.
    fn serde_json_like(v: &Vocabulary) -> Vocabulary {
        let repr: VocabularyRepr = v.clone().into();
        repr.into()
    }

    #[test]
    fn split_sizes() {
        let c = labeled(200);
        let s = split_validation(&c, 100, 7).unwrap();
        assert_eq!(s.validation.len(), 100);
        assert_eq!(s.pool.len(), 100);
        assert_eq!(s, split_validation(&c, 100, 7).unwrap());
        let s0 = split_validation(&c, 0, 7).unwrap();
        assert!(s0.validation.is_empty());
        assert_eq!(s0.pool, c.labeled);
        assert!(split_validation(&c, 201, 7).is_err());
    }

    proptest::proptest! {
        #[test]
        fn split_is_a_partition(n in 0usize..60, frac in 0.0f64..1.0, seed in 0u64..1000) {
            let c = labeled(n);
            let size = (n as f64 * frac) as usize;
            let s = split_validation(&c, size, seed).unwrap();
            let mut ids: Vec<&str> = s.validation.iter().chain(&s.pool).map(|e| e.id.as_str()).collect();
            ids.sort_unstable();
            let mut expected: Vec<&str> = c.labeled.iter().map(|e| e.id.as_str()).collect();
            expected.sort_unstable();
            proptest::prop_assert_eq!(ids, expected);
        }

        #[test]
        fn vocabulary_probabilities_form_a_distribution(
            docs in proptest::collection::vec(proptest::collection::vec("[a-f]{1,2}", 1..8), 1..10),
            cap in 1usize..20,
        ) {
            let labeled = docs.iter().enumerate().map(|(i, d)| {
                Example::new(format!("{i}"), d.clone(), None, "d").unwrap()
            }).collect();
            let c = DomainCorpus::new("d", labeled, vec![]).unwrap();
            let v = build_vocabulary(&[c], cap).unwrap();
            proptest::prop_assert!(v.len() <= cap);
            proptest::prop_assert!(v.probabilities().iter().all(|&p| p >= 0.0));
            let s: f64 = v.probabilities().iter().sum();
            proptest::prop_assert!((s - 1.0).abs() < 1e-9);
        }
    }
}
