//! Top-n selection, baselines and experiment drivers.

mod experiment;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{Example, Polarity, Vocabulary};
use crate::metrics::jensen_shannon;
use crate::repr::{domain_representation, term_distribution};
use crate::{seeded_rng, Error, Result};

pub use experiment::{
    data_selection_objective, ExperimentConfig, ExperimentReport, LearnedRun, LearnedWeights, Method, PreparedExperiment,
    RunRecord, Setting, TransferEndpoint, TransferSpec,
};

/// Where a selection came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Baseline {
        name: String,
    },
    Weights {
        weights: Vec<f64>,
        feature_config_id: String,
        means: Vec<f64>,
        stds: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected positions in the pool, in rank order.
    pub indices: Vec<usize>,
    pub ids: Vec<String>,
    /// Score of each selected example, when the method produces scores.
    pub scores: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl SelectionResult {
    fn build(pool: &[&Example], indices: Vec<usize>, scores: Option<&[f64]>, provenance: Provenance) -> Self {
        SelectionResult {
            ids: indices.iter().map(|&i| pool[i].id.clone()).collect(),
            scores: scores.map(|s| indices.iter().map(|&i| s[i]).collect()),
            indices,
            provenance,
        }
    }

    /// Selected examples in pool order, the order they are trained on.
    pub fn training_set<'a>(&self, pool: &[&'a Example]) -> Vec<&'a Example> {
        let mut idx = self.indices.clone();
        idx.sort_unstable();
        idx.into_iter().map(|i| pool[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn by_score_desc(scores: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
}

fn too_many(needed: usize, available: usize) -> Error {
    Error::Insufficient {
        what: "pool examples",
        needed,
        available,
    }
}

/// Indices of the `n` highest scores, best first; equal scores keep index
/// order. With `classes`, `n / 2` are taken from each class and an odd
/// remainder goes to the class whose next candidate scores higher. Taking
/// the whole pool is always allowed.
pub fn rank_top_n(scores: &[f64], n: usize, classes: Option<&[Polarity]>) -> Result<Vec<usize>> {
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    if n > scores.len() {
        return Err(too_many(n, scores.len()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(by_score_desc(scores));
    let classes = match classes {
        Some(c) if n < scores.len() => c,
        _ => {
            order.truncate(n);
            return Ok(order);
        }
    };
    if classes.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            left: scores.len(),
            right: classes.len(),
        });
    }
    let neg: Vec<usize> = order.iter().copied().filter(|&i| classes[i] == Polarity::Negative).collect();
    let pos: Vec<usize> = order.iter().copied().filter(|&i| classes[i] == Polarity::Positive).collect();
    let half = n / 2;
    let (mut take_neg, mut take_pos) = (half, half);
    if n % 2 == 1 {
        match (neg.get(half), pos.get(half)) {
            (Some(&a), Some(&b)) => {
                if by_score_desc(scores)(&a, &b) == Ordering::Less {
                    take_neg += 1
                } else {
                    take_pos += 1
                }
            }
            (Some(_), None) => take_neg += 1,
            _ => take_pos += 1,
        }
    }
    if take_neg > neg.len() {
        return Err(Error::Insufficient {
            what: "negative examples",
            needed: take_neg,
            available: neg.len(),
        });
    }
    if take_pos > pos.len() {
        return Err(Error::Insufficient {
            what: "positive examples",
            needed: take_pos,
            available: pos.len(),
        });
    }
    let mut chosen: Vec<usize> = neg[..take_neg].iter().chain(&pos[..take_pos]).copied().collect();
    chosen.sort_by(by_score_desc(scores));
    Ok(chosen)
}

fn polarities(pool: &[&Example]) -> Result<Vec<Polarity>> {
    pool.iter()
        .map(|e| {
            e.polarity()
                .ok_or_else(|| Error::invalid(format!("example `{}` has no polarity for stratification", e.id)))
        })
        .collect()
}

/// Top-n selection over a scored pool.
pub fn select_top_n(
    pool: &[&Example],
    scores: &[f64],
    n: usize,
    stratify: bool,
    provenance: Provenance,
) -> Result<SelectionResult> {
    if scores.len() != pool.len() {
        return Err(Error::DimensionMismatch {
            left: pool.len(),
            right: scores.len(),
        });
    }
    let classes = if stratify { Some(polarities(pool)?) } else { None };
    let idx = rank_top_n(scores, n, classes.as_deref())?;
    Ok(SelectionResult::build(pool, idx, Some(scores), provenance))
}

fn baseline(name: &str) -> Provenance {
    Provenance::Baseline { name: String::from(name) }
}

/// `n` pool examples drawn uniformly without replacement.
pub fn baseline_random(pool: &[&Example], n: usize, seed: u64) -> Result<SelectionResult> {
    if n > pool.len() {
        return Err(too_many(n, pool.len()));
    }
    let mut rng = seeded_rng(seed);
    let mut idx = rand::seq::index::sample(&mut rng, pool.len(), n).into_vec();
    idx.sort_unstable();
    Ok(SelectionResult::build(pool, idx, None, baseline("random")))
}

/// The `n` examples whose term distributions are closest to the target's
/// under Jensen-Shannon divergence.
pub fn baseline_js_examples(
    pool: &[&Example],
    target: &[f64],
    n: usize,
    vocab: &Vocabulary,
    stratify: bool,
) -> Result<SelectionResult> {
    let scores: Vec<f64> = pool
        .iter()
        .map(|e| Ok(-jensen_shannon(&term_distribution(&e.tokens, vocab)?, target)?))
        .collect::<Result<_>>()?;
    let mut out = select_top_n(pool, &scores, n, stratify, baseline("js-examples"))?;
    // report divergences, not their negations
    if let Some(s) = out.scores.as_mut() {
        s.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(out)
}

/// JS divergence between each source domain's aggregate term distribution
/// and the target, sorted ascending; equal divergences sort by domain id.
pub fn rank_domains<'a>(
    domains: &[(&'a str, Vec<&'a Example>)],
    target: &[f64],
    vocab: &Vocabulary,
) -> Result<Vec<(&'a str, f64)>> {
    let mut ranked: Vec<(&str, f64)> = domains
        .iter()
        .map(|(d, text)| Ok((*d, jensen_shannon(&domain_representation(text.iter().copied(), vocab)?, target)?)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(a.0.cmp(b.0)));
    Ok(ranked)
}

/// `n` examples drawn uniformly from the pool members of the source domain
/// most similar to the target. `domain_text` holds, per source domain, the
/// text its representation is built from.
pub fn baseline_js_domain(
    pool: &[&Example],
    domain_text: &[(&str, Vec<&Example>)],
    target: &[f64],
    n: usize,
    seed: u64,
    vocab: &Vocabulary,
) -> Result<SelectionResult> {
    let ranked = rank_domains(domain_text, target, vocab)?;
    let (chosen, _) = *ranked
        .first()
        .ok_or_else(|| Error::invalid("no source domains"))?;
    let members: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].domain == chosen).collect();
    if n > members.len() {
        return Err(Error::Insufficient {
            what: "examples in the most similar domain",
            needed: n,
            available: members.len(),
        });
    }
    let mut rng = seeded_rng(seed);
    let mut idx: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), n)
        .into_iter()
        .map(|k| members[k])
        .collect();
    idx.sort_unstable();
    Ok(SelectionResult::build(
        pool,
        idx,
        None,
        Provenance::Baseline {
            name: format!("js-domain:{chosen}"),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn ex(id: &str, domain: &str, text: &str, p: Polarity) -> Example {
        Example::new(
            id,
            text.split(' ').map(|s| s.to_string()).collect(),
            Some(Label::Sentiment(p)),
            domain,
        )
        .unwrap()
    }

    #[test]
    fn top_n_basic() {
        assert_eq!(rank_top_n(&[3.0, 1.0, 2.0], 2, None).unwrap(), [0, 2]);
        assert_eq!(rank_top_n(&[5.0, 5.0, 5.0], 2, None).unwrap(), [0, 1]);
        assert!(rank_top_n(&[1.0], 2, None).is_err());
    }

    #[test]
    fn top_n_stratified() {
        use Polarity::*;
        let scores = [9.0, 8.0, 7.0, 1.0, 0.5, 0.2];
        let classes = [Positive, Positive, Positive, Negative, Negative, Negative];
        let idx = rank_top_n(&scores, 4, Some(&classes)).unwrap();
        assert_eq!(idx, [0, 1, 3, 4]);
        let odd = rank_top_n(&scores, 3, Some(&classes)).unwrap();
        assert_eq!(odd, [0, 1, 3]);
        let all = rank_top_n(&scores, 6, Some(&classes)).unwrap();
        assert_eq!(all.len(), 6);
        let skewed = [Positive, Positive, Positive, Positive, Positive, Negative];
        assert!(rank_top_n(&scores, 4, Some(&skewed)).is_err());
    }

    #[test]
    fn random_baseline() {
        let data: Vec<Example> = (0..1000)
            .map(|i| ex(&format!("s:{i}"), "s", "w", Polarity::Positive))
            .collect();
        let pool: Vec<&Example> = data.iter().collect();
        let all = baseline_random(&pool, 1000, 1).unwrap();
        assert_eq!(all.indices, (0..1000).collect::<Vec<_>>());
        assert_eq!(baseline_random(&pool, 10, 5).unwrap(), baseline_random(&pool, 10, 5).unwrap());
        let differing = (0..100u64)
            .filter(|&s| baseline_random(&pool, 10, 2 * s).unwrap().ids != baseline_random(&pool, 10, 2 * s + 1).unwrap().ids)
            .count();
        assert_eq!(differing, 100);
        assert!(baseline_random(&pool, 1001, 0).is_err());
    }

    #[test]
    fn js_examples_identity_and_ties() {
        let vocab = Vocabulary::from_counts(
            ["a", "b", "c", "d", "e", "f"].iter().map(|w| (w.to_string(), 1)).collect(),
        );
        let data = [
            ex("0", "s", "c d", Polarity::Positive),
            ex("1", "s", "a b", Polarity::Positive),
            ex("2", "s", "e f", Polarity::Positive),
        ];
        let pool: Vec<&Example> = data.iter().collect();
        let target = term_distribution(&["a", "b"], &vocab).unwrap();
        let sel = baseline_js_examples(&pool, &target, 2, &vocab, false).unwrap();
        assert_eq!(sel.indices, [1, 0]);
        assert_eq!(sel.scores.as_ref().unwrap()[0], 0.0);
        assert!((sel.scores.unwrap()[1] - core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn js_domain_choice() {
        let vocab = Vocabulary::from_counts(["a", "b", "c"].iter().map(|w| (w.to_string(), 1)).collect());
        let data = [
            ex("x:0", "x", "c c", Polarity::Positive),
            ex("y:0", "y", "a b", Polarity::Positive),
            ex("y:1", "y", "b a", Polarity::Negative),
            ex("z:0", "z", "a b", Polarity::Negative),
        ];
        let pool: Vec<&Example> = data.iter().collect();
        let by_domain = |d: &str| pool.iter().copied().filter(|e| e.domain == d).collect::<Vec<_>>();
        let text = vec![("x", by_domain("x")), ("z", by_domain("z")), ("y", by_domain("y"))];
        let target = term_distribution(&["a", "b"], &vocab).unwrap();
        // y and z both match the target exactly; y wins on id order
        let sel = baseline_js_domain(&pool, &text, &target, 2, 0, &vocab).unwrap();
        assert!(sel.ids.iter().all(|id| id.starts_with("y:")));
        assert!(baseline_js_domain(&pool, &text, &target, 3, 0, &vocab).is_err());
    }

    proptest! {
        #[test]
        fn positive_scaling_keeps_selection(scores in prop::collection::vec(-5.0f64..5.0, 1..60), c in 0.01f64..100.0, frac in 0.0f64..1.0) {
            let n = ((scores.len() as f64) * frac) as usize;
            let scaled: Vec<f64> = scores.iter().map(|s| s * c).collect();
            let a = rank_top_n(&scores, n, None).unwrap();
            let b = rank_top_n(&scaled, n, None).unwrap();
            let mut a2 = a.clone();
            let mut b2 = b.clone();
            a2.sort_unstable();
            b2.sort_unstable();
            prop_assert_eq!(a2, b2);
        }

        #[test]
        fn top_n_is_a_prefix_of_the_ranking(scores in prop::collection::vec(-5.0f64..5.0, 1..60)) {
            let full = rank_top_n(&scores, scores.len(), None).unwrap();
            for n in 0..scores.len() {
                prop_assert_eq!(&rank_top_n(&scores, n, None).unwrap()[..], &full[..n]);
            }
        }
    }
}
