use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::{Error, Result};

/// Unigrams followed by space-joined bigrams.
pub fn ngrams<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    let mut out: Vec<String> = tokens.iter().map(|t| String::from(t.as_ref())).collect();
    for pair in tokens.windows(2) {
        let mut g = String::from(pair[0].as_ref());
        g.push(' ');
        g.push_str(pair[1].as_ref());
        out.push(g);
    }
    out
}

/// Sparse vector with strictly increasing indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| dense[i as usize] * v)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct TfidfVectorizer {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    df: Vec<u32>,
    idf: Vec<f64>,
    n_docs: usize,
}

/// Keeps the `max_features` most frequent n-grams (by total count, ties
/// broken lexicographically) and computes `idf = ln(N / (1 + df)) + 1`.
pub fn fit_tfidf<'a, D, S>(docs: D, max_features: usize) -> Result<TfidfVectorizer>
where
    D: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let mut stats: BTreeMap<String, (u64, u32)> = BTreeMap::new();
    let mut n_docs = 0usize;
    for doc in docs {
        n_docs += 1;
        let grams = ngrams(doc);
        let mut seen = hashbrown::HashSet::new();
        for g in grams {
            let first = seen.insert(g.clone());
            let entry = stats.entry(g).or_insert((0, 0));
            entry.0 += 1;
            if first {
                entry.1 += 1;
            }
        }
    }
    if n_docs == 0 {
        return Err(Error::invalid("cannot fit tf-idf on zero documents"));
    }
    if max_features == 0 {
        return Err(Error::invalid("max_features must be at least 1"));
    }
    let mut ranked: Vec<(String, u64, u32)> = stats.into_iter().map(|(g, (tf, df))| (g, tf, df)).collect();
    // BTreeMap order is lexicographic and the sort is stable
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    ranked.truncate(max_features);

    let n = n_docs as f64;
    let mut terms = Vec::with_capacity(ranked.len());
    let mut df = Vec::with_capacity(ranked.len());
    let mut idf = Vec::with_capacity(ranked.len());
    let mut index = HashMap::with_capacity(ranked.len());
    for (i, (g, _, d)) in ranked.into_iter().enumerate() {
        index.insert(g.clone(), i as u32);
        terms.push(g);
        df.push(d);
        idf.push(libm::log(n / (1.0 + d as f64)) + 1.0);
    }
    Ok(TfidfVectorizer {
        terms,
        index,
        df,
        idf,
        n_docs,
    })
}

impl TfidfVectorizer {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequency(&self, gram: &str) -> Option<u32> {
        self.index.get(gram).map(|&i| self.df[i as usize])
    }

    pub fn idf(&self, gram: &str) -> Option<f64> {
        self.index.get(gram).map(|&i| self.idf[i as usize])
    }

    /// l2-normalized tf-idf vector; empty when no n-gram is known.
    pub fn transform<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for g in ngrams(tokens) {
            if let Some(&i) = self.index.get(&g) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        let mut v = SparseVector {
            indices: Vec::with_capacity(counts.len()),
            values: Vec::with_capacity(counts.len()),
        };
        for (i, c) in counts {
            v.indices.push(i);
            v.values.push(c * self.idf[i as usize]);
        }
        let norm = libm::sqrt(v.values.iter().map(|x| x * x).sum());
        if norm > 0.0 {
            v.values.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}
