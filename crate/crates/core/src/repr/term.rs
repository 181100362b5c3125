use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::corpus::{Example, Vocabulary};
use crate::{Error, Result};

const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A dense discrete probability distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates non-negativity and unit mass.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("probability vector is empty"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("probability vector has a negative or non-finite entry"));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("probability vector sums to {sum}")));
        }
        Ok(ProbVector(values))
    }

    /// Normalizes non-negative counts. All-zero input is rejected.
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        let total: f64 = counts.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::invalid("cannot normalize an all-zero count vector"));
        }
        Ok(ProbVector(counts.iter().map(|c| c / total).collect()))
    }

    pub fn uniform(k: usize) -> Self {
        ProbVector(vec![1.0 / k as f64; k])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ProbVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

fn accumulate<S: AsRef<str>>(counts: &mut [f64], tokens: &[S], vocab: &Vocabulary) {
    for i in vocab.encode(tokens) {
        counts[i] += 1.0;
    }
}

/// Relative frequency over the vocabulary of the in-vocabulary tokens.
pub fn term_distribution<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Result<ProbVector> {
    let mut counts = vec![0.0; vocab.len()];
    accumulate(&mut counts, tokens, vocab);
    ProbVector::from_counts(&counts).map_err(|_| Error::NoInVocabularyTokens)
}

/// Term distribution over the concatenation of every given example.
pub fn domain_representation<'a, I>(examples: I, vocab: &Vocabulary) -> Result<ProbVector>
where
    I: IntoIterator<Item = &'a Example>,
{
    let mut counts = vec![0.0; vocab.len()];
    for ex in examples {
        accumulate(&mut counts, &ex.tokens, vocab);
    }
    ProbVector::from_counts(&counts).map_err(|_| Error::NoInVocabularyTokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn vocab(words: &[&str]) -> Vocabulary {
        Vocabulary::from_counts(words.iter().map(|w| (w.to_string(), 1)).collect())
    }

    #[test]
    fn relative_frequencies() {
        let v = vocab(&["a", "b", "c"]);
        let p = term_distribution(&["a", "a", "b"], &v).unwrap();
        assert_eq!(&*p, &[2.0 / 3.0, 1.0 / 3.0, 0.0]);
        let p = term_distribution(&["c"], &v).unwrap();
        assert_eq!(&*p, &[0.0, 0.0, 1.0]);
        assert_eq!(term_distribution(&["z"], &v), Err(Error::NoInVocabularyTokens));
    }

    fn ex(id: &str, toks: &[&str]) -> Example {
        Example::new(id, toks.iter().map(|s| s.to_string()).collect(), None, "d").unwrap()
    }

    #[test]
    fn domain_concatenation() {
        let v = vocab(&["a", "b"]);
        let lab = [ex("1", &["a"])];
        let unl = [ex("2", &["b"])];
        let p = domain_representation(lab.iter().chain(&unl), &v).unwrap();
        assert_eq!(&*p, &[0.5, 0.5]);
        let p = domain_representation(lab.iter(), &v).unwrap();
        assert_eq!(&*p, &[1.0, 0.0]);
        assert!(domain_representation([ex("3", &["q"])].iter(), &v).is_err());
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
        assert!(ProbVector::from_counts(&[0.0, 0.0]).is_err());
        assert!(ProbVector::new(vec![0.25; 4]).is_ok());
    }
}
