//! Feature layout, per-example feature computation and z-normalization.
//!
//! Columns come in a frozen order: for each enabled representation (term,
//! topic, embedding, in that order) its similarity measures, then the six
//! diversity measures. Term and topic distributions use all six similarity
//! measures; embedding averages can be negative, so they only use cosine,
//! Euclidean and variational. The order is versioned by
//! [`FEATURE_LAYOUT_VERSION`] and captured in [`FeatureConfig::identifier`],
//! which travels with learned weights.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use super::divergence::{
    bhattacharyya, cosine_similarity, euclidean_distance, jensen_shannon, renyi_divergence,
    variational_distance, DEFAULT_EPSILON,
};
use super::diversity::diversity_features;
use crate::corpus::{Example, Vocabulary};
use crate::repr::{
    domain_representation, embed_example, infer_topics, term_distribution, DenseVector, EmbeddingTable, LdaModel,
    ProbVector,
};
use crate::{Error, Result};

pub const FEATURE_LAYOUT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Term,
    Topic,
    Embedding,
}

impl Representation {
    pub const ALL: [Representation; 3] = [Representation::Term, Representation::Topic, Representation::Embedding];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Term => "term",
            Representation::Topic => "topic",
            Representation::Embedding => "embedding",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn measures(self) -> &'static [SimilarityMeasure] {
        match self {
            Representation::Embedding => &SimilarityMeasure::GEOMETRIC,
            _ => &SimilarityMeasure::ALL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SimilarityMeasure {
    JensenShannon,
    Renyi,
    Bhattacharyya,
    Cosine,
    Euclidean,
    Variational,
}

impl SimilarityMeasure {
    pub const ALL: [SimilarityMeasure; 6] = [
        SimilarityMeasure::JensenShannon,
        SimilarityMeasure::Renyi,
        SimilarityMeasure::Bhattacharyya,
        SimilarityMeasure::Cosine,
        SimilarityMeasure::Euclidean,
        SimilarityMeasure::Variational,
    ];
    pub const GEOMETRIC: [SimilarityMeasure; 3] =
        [SimilarityMeasure::Cosine, SimilarityMeasure::Euclidean, SimilarityMeasure::Variational];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityMeasure::JensenShannon => "jensen_shannon",
            SimilarityMeasure::Renyi => "renyi",
            SimilarityMeasure::Bhattacharyya => "bhattacharyya",
            SimilarityMeasure::Cosine => "cosine",
            SimilarityMeasure::Euclidean => "euclidean",
            SimilarityMeasure::Variational => "variational",
        }
    }

    fn evaluate(self, p: &[f64], q: &[f64], alpha: f64, epsilon: f64) -> Result<f64> {
        match self {
            SimilarityMeasure::JensenShannon => jensen_shannon(p, q),
            SimilarityMeasure::Renyi => renyi_divergence(p, q, alpha, epsilon),
            SimilarityMeasure::Bhattacharyya => bhattacharyya(p, q, epsilon),
            SimilarityMeasure::Cosine => cosine_similarity(p, q),
            SimilarityMeasure::Euclidean => euclidean_distance(p, q),
            SimilarityMeasure::Variational => variational_distance(p, q),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiversityMeasure {
    Types,
    TypeTokenRatio,
    Entropy,
    Simpson,
    RenyiEntropy,
    QuadraticEntropy,
}

impl DiversityMeasure {
    pub const ALL: [DiversityMeasure; 6] = [
        DiversityMeasure::Types,
        DiversityMeasure::TypeTokenRatio,
        DiversityMeasure::Entropy,
        DiversityMeasure::Simpson,
        DiversityMeasure::RenyiEntropy,
        DiversityMeasure::QuadraticEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DiversityMeasure::Types => "types",
            DiversityMeasure::TypeTokenRatio => "type_token_ratio",
            DiversityMeasure::Entropy => "entropy",
            DiversityMeasure::Simpson => "simpson",
            DiversityMeasure::RenyiEntropy => "renyi_entropy",
            DiversityMeasure::QuadraticEntropy => "quadratic_entropy",
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&m| m == self).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureId {
    Similarity(Representation, SimilarityMeasure),
    Diversity(DiversityMeasure),
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureId::Similarity(r, m) => write!(f, "{}.{}", r.name(), m.name()),
            FeatureId::Diversity(m) => write!(f, "diversity.{}", m.name()),
        }
    }
}

impl FeatureId {
    pub fn parse(s: &str) -> Option<Self> {
        let (family, measure) = s.split_once('.')?;
        if family == "diversity" {
            return DiversityMeasure::ALL
                .into_iter()
                .find(|m| m.name() == measure)
                .map(FeatureId::Diversity);
        }
        let repr = Representation::parse(family)?;
        repr.measures()
            .iter()
            .find(|m| m.name() == measure)
            .map(|&m| FeatureId::Similarity(repr, m))
    }
}

/// One feature-matrix column: a feature, optionally negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Column {
    pub feature: FeatureId,
    pub negated: bool,
}

impl Column {
    pub fn new(feature: FeatureId) -> Self {
        Column {
            feature,
            negated: false,
        }
    }

    pub fn negated(feature: FeatureId) -> Self {
        Column { feature, negated: true }
    }

    /// Parses `repr.measure` or `diversity.measure`, with a leading `-` for negation.
    pub fn parse(s: &str) -> Option<Self> {
        match s.strip_prefix('-') {
            Some(rest) => FeatureId::parse(rest).map(Column::negated),
            None => FeatureId::parse(s).map(Column::new),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        self.feature.fmt(f)
    }
}

/// Which features make up `φ(X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Representations used for similarity features, kept in canonical order.
    pub representations: Vec<Representation>,
    pub similarity: bool,
    pub diversity: bool,
    pub renyi_alpha: f64,
    pub epsilon: f64,
    /// Explicit column layout; overrides the family switches when set.
    pub columns: Option<Vec<Column>>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            representations: vec![Representation::Term],
            similarity: true,
            diversity: true,
            renyi_alpha: 0.99,
            epsilon: DEFAULT_EPSILON,
            columns: None,
        }
    }
}

impl FeatureConfig {
    /// Parses a `+`-separated feature-set description. Items are family
    /// keywords (`term`, `topic`, `embedding` for similarity over that
    /// representation, `diversity`) or individual column names such as
    /// `term.jensen_shannon` or `-term.jensen_shannon`.
    pub fn parse_feature_set(spec: &str) -> Result<Self> {
        let items: Vec<&str> = spec.split(['+', ',']).map(str::trim).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(Error::invalid("empty feature set"));
        }
        let families_only = items
            .iter()
            .all(|s| *s == "diversity" || Representation::parse(s).is_some());
        let mut cfg = FeatureConfig {
            representations: Vec::new(),
            similarity: false,
            diversity: false,
            ..FeatureConfig::default()
        };
        if families_only {
            for item in items {
                match Representation::parse(item) {
                    Some(r) => {
                        cfg.similarity = true;
                        if !cfg.representations.contains(&r) {
                            cfg.representations.push(r);
                        }
                    }
                    None => cfg.diversity = true,
                }
            }
            cfg.representations.sort();
        } else {
            let mut columns = Vec::new();
            for item in items {
                if item == "diversity" {
                    columns.extend(DiversityMeasure::ALL.map(|m| Column::new(FeatureId::Diversity(m))));
                } else if let Some(r) = Representation::parse(item) {
                    columns.extend(r.measures().iter().map(|&m| Column::new(FeatureId::Similarity(r, m))));
                } else {
                    columns.push(
                        Column::parse(item).ok_or_else(|| Error::invalid(format!("unknown feature `{item}`")))?,
                    );
                }
            }
            cfg.columns = Some(columns);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.renyi_alpha == 1.0 || !(self.renyi_alpha > 0.0) || !self.renyi_alpha.is_finite() {
            return Err(Error::invalid("Renyi alpha must be positive, finite and different from 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("smoothing epsilon must be positive"));
        }
        if self.columns().is_empty() {
            return Err(Error::invalid("no feature family enabled"));
        }
        Ok(())
    }

    pub fn columns(&self) -> Vec<Column> {
        if let Some(cols) = &self.columns {
            return cols.clone();
        }
        let mut cols = Vec::new();
        if self.similarity {
            for r in Representation::ALL {
                if self.representations.contains(&r) {
                    cols.extend(r.measures().iter().map(|&m| Column::new(FeatureId::Similarity(r, m))));
                }
            }
        }
        if self.diversity {
            cols.extend(DiversityMeasure::ALL.map(|m| Column::new(FeatureId::Diversity(m))));
        }
        cols
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns().iter().map(ToString::to_string).collect()
    }

    pub fn uses(&self, repr: Representation) -> bool {
        self.columns()
            .iter()
            .any(|c| matches!(c.feature, FeatureId::Similarity(r, _) if r == repr))
    }

    pub fn uses_diversity(&self) -> bool {
        self.columns().iter().any(|c| matches!(c.feature, FeatureId::Diversity(_)))
    }

    /// Short human label, e.g. `term+diversity`.
    pub fn label(&self) -> String {
        if self.columns.is_some() {
            return self.column_names().join("+");
        }
        let mut parts: Vec<&str> = Vec::new();
        if self.similarity {
            for r in Representation::ALL {
                if self.representations.contains(&r) {
                    parts.push(r.name());
                }
            }
        }
        if self.diversity {
            parts.push("diversity");
        }
        parts.join("+")
    }

    /// Versioned identity of the column layout and feature parameters. Weight
    /// vectors may only be applied to matrices with the same identifier.
    pub fn identifier(&self) -> String {
        format!(
            "v{FEATURE_LAYOUT_VERSION}:{}:alpha={}:eps={:e}",
            self.column_names().join(","),
            self.renyi_alpha,
            self.epsilon
        )
    }
}

/// Shared resources needed to compute representations.
#[derive(Clone, Copy, Debug)]
pub struct FeatureResources<'a> {
    pub vocab: &'a Vocabulary,
    pub lda: Option<&'a LdaModel>,
    pub embeddings: Option<&'a EmbeddingTable>,
}

/// The representations of one example (or of a whole domain).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExampleRepr {
    pub term: Option<ProbVector>,
    pub topic: Option<ProbVector>,
    pub embedding: Option<DenseVector>,
}

impl ExampleRepr {
    fn missing(kind: Representation) -> Error {
        Error::invalid(format!("{} representation unavailable", kind.name()))
    }

    fn lda<'a>(res: &FeatureResources<'a>) -> Result<&'a LdaModel> {
        res.lda.ok_or_else(|| Error::invalid("topic features need a trained LDA model"))
    }

    fn table<'a>(res: &FeatureResources<'a>) -> Result<&'a EmbeddingTable> {
        res.embeddings
            .ok_or_else(|| Error::invalid("embedding features need an embedding table"))
    }

    /// Computes the requested representations of a token sequence.
    pub fn of_tokens<S: AsRef<str>>(tokens: &[S], kinds: &[Representation], res: &FeatureResources) -> Result<Self> {
        let mut out = ExampleRepr::default();
        for &kind in kinds {
            match kind {
                Representation::Term => out.term = Some(term_distribution(tokens, res.vocab)?),
                Representation::Topic => out.topic = Some(infer_topics(Self::lda(res)?, tokens)),
                Representation::Embedding => {
                    out.embedding = Some(embed_example(tokens, Self::table(res)?, res.vocab)?)
                }
            }
        }
        Ok(out)
    }

    /// Representations of the concatenated text of a domain.
    pub fn of_domain<'e, I>(examples: I, kinds: &[Representation], res: &FeatureResources) -> Result<Self>
    where
        I: IntoIterator<Item = &'e Example> + Clone,
    {
        let mut out = ExampleRepr::default();
        let concat = || -> Vec<&str> {
            examples
                .clone()
                .into_iter()
                .flat_map(|e| e.tokens.iter().map(String::as_str))
                .collect()
        };
        for &kind in kinds {
            match kind {
                Representation::Term => out.term = Some(domain_representation(examples.clone(), res.vocab)?),
                Representation::Topic => out.topic = Some(infer_topics(Self::lda(res)?, &concat())),
                Representation::Embedding => {
                    out.embedding = Some(embed_example(&concat(), Self::table(res)?, res.vocab)?)
                }
            }
        }
        Ok(out)
    }

    pub fn get(&self, kind: Representation) -> Option<&[f64]> {
        match kind {
            Representation::Term => self.term.as_deref(),
            Representation::Topic => self.topic.as_deref(),
            Representation::Embedding => self.embedding.as_deref(),
        }
    }
}

/// Similarity features of an example against the target for one
/// representation, in [`Representation::measures`] order.
pub fn similarity_features(
    example: &ExampleRepr,
    target: &ExampleRepr,
    kind: Representation,
    config: &FeatureConfig,
) -> Result<Vec<f64>> {
    let p = example.get(kind).ok_or_else(|| ExampleRepr::missing(kind))?;
    let q = target.get(kind).ok_or_else(|| ExampleRepr::missing(kind))?;
    kind.measures()
        .iter()
        .map(|m| m.evaluate(p, q, config.renyi_alpha, config.epsilon))
        .collect()
}

/// `φ(X)`: z-normalized features, one row per example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    config_id: String,
    column_names: Vec<String>,
    example_ids: Vec<String>,
    /// Row-major normalized values.
    values: Vec<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl FeatureMatrix {
    /// Z-normalizes raw row-major values column by column (population
    /// statistics). Constant columns become all zeros.
    pub fn from_raw(
        config_id: String,
        column_names: Vec<String>,
        example_ids: Vec<String>,
        mut values: Vec<f64>,
    ) -> Result<Self> {
        let cols = column_names.len();
        let rows = example_ids.len();
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: rows * cols,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                example: example_ids[pos / cols].clone(),
                feature: column_names[pos % cols].clone(),
            });
        }
        let mut means = vec![0.0; cols];
        let mut stds = vec![0.0; cols];
        if rows > 0 {
            for j in 0..cols {
                let mean = (0..rows).map(|i| values[i * cols + j]).sum::<f64>() / rows as f64;
                let var = (0..rows)
                    .map(|i| {
                        let d = values[i * cols + j] - mean;
                        d * d
                    })
                    .sum::<f64>()
                    / rows as f64;
                let std = libm::sqrt(var);
                let constant = std <= 1e-12 * libm::fabs(mean);
                for i in 0..rows {
                    let v = &mut values[i * cols + j];
                    *v = if constant { 0.0 } else { (*v - mean) / std };
                }
                means[j] = mean;
                stds[j] = if constant { 0.0 } else { std };
            }
        }
        Ok(FeatureMatrix {
            config_id,
            column_names,
            example_ids,
            values,
            means,
            stds,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.example_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn config_id(&self) -> &str {
        &self.config_id
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn example_ids(&self) -> &[String] {
        &self.example_ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i)[j]).collect()
    }

    /// Per-column means of the raw values.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Per-column population standard deviations; zero marks a constant column.
    pub fn stds(&self) -> &[f64] {
        &self.stds
    }
}

/// Computes and normalizes the features of every example against the target.
pub fn build_feature_matrix<E: Borrow<Example>>(
    examples: &[E],
    target: &ExampleRepr,
    res: &FeatureResources,
    config: &FeatureConfig,
) -> Result<FeatureMatrix> {
    config.validate()?;
    let columns = config.columns();
    let kinds: Vec<Representation> = Representation::ALL.into_iter().filter(|&r| config.uses(r)).collect();
    let diversity = config.uses_diversity();
    let mut values = Vec::with_capacity(examples.len() * columns.len());
    for ex in examples {
        let ex = ex.borrow();
        let repr = ExampleRepr::of_tokens(&ex.tokens, &kinds, res)?;
        let sims: Vec<(Representation, Vec<f64>)> = kinds
            .iter()
            .map(|&k| similarity_features(&repr, target, k, config).map(|v| (k, v)))
            .collect::<Result<_>>()?;
        let div = if diversity {
            Some(diversity_features(&ex.tokens, res.vocab, res.embeddings, config.renyi_alpha)?.to_array())
        } else {
            None
        };
        for col in &columns {
            let v = match col.feature {
                FeatureId::Similarity(r, m) => {
                    let (_, vals) = sims.iter().find(|(k, _)| *k == r).expect("kind computed");
                    let idx = r.measures().iter().position(|&x| x == m).expect("measure in layout");
                    vals[idx]
                }
                FeatureId::Diversity(m) => div.expect("diversity computed")[m.index()],
            };
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature {
                    example: ex.id.clone(),
                    feature: col.to_string(),
                });
            }
            values.push(if col.negated { -v } else { v });
        }
    }
    FeatureMatrix::from_raw(
        config.identifier(),
        config.column_names(),
        examples.iter().map(|e| e.borrow().id.clone()).collect(),
        values,
    )
}

/// A weight vector with every entry in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::invalid("weights must lie in [-1, 1]"));
        }
        Ok(WeightVector(values))
    }

    /// Clamps each entry into `[-1, 1]`; non-finite entries become 0.
    pub fn clamped(values: Vec<f64>) -> Self {
        WeightVector(
            values
                .into_iter()
                .map(|v| if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 })
                .collect(),
        )
    }

    pub fn zeros(dim: usize) -> Self {
        WeightVector(vec![0.0; dim])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Per-example scores; higher means more desirable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Self {
        ScoreVector(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ScoreVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `S = φ(X) · wᵀ`. Accepts any slice so scaled weights outside the unit box
/// can be scored too.
pub fn score_examples(matrix: &FeatureMatrix, w: &[f64]) -> Result<ScoreVector> {
    if w.len() != matrix.n_cols() {
        return Err(Error::DimensionMismatch {
            left: matrix.n_cols(),
            right: w.len(),
        });
    }
    Ok(ScoreVector(
        (0..matrix.n_rows())
            .map(|i| matrix.row(i).iter().zip(w).map(|(a, b)| a * b).sum())
            .collect(),
    ))
}
