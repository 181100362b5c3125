use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{baseline_js_domain, baseline_js_examples, baseline_random, select_top_n, Provenance, SelectionResult};
use crate::bayesopt::{optimize, BoConfig, ObservationSet};
use crate::corpus::{split_validation, DomainCorpus, Example, Vocabulary};
use crate::metrics::{
    build_feature_matrix, diversity_features, score_examples, ExampleRepr, FeatureConfig, FeatureMatrix,
    FeatureResources, Representation, WeightVector,
};
use crate::rng::derive_seed;
use crate::tasks::{Task, TaskKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Random,
    JsExamples,
    JsDomain,
    Learned,
    AllSource,
    Transfer,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Random,
        Method::JsExamples,
        Method::JsDomain,
        Method::Learned,
        Method::AllSource,
        Method::Transfer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::JsExamples => "js-examples",
            Method::JsDomain => "js-domain",
            Method::Learned => "learned",
            Method::AllSource => "all-source",
            Method::Transfer => "transfer",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    /// Training-set size; capped at the pool size.
    pub n: usize,
    pub validation_size: usize,
    pub split_seed: u64,
    pub features: FeatureConfig,
    pub bo: BoConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: TaskKind::Sentiment,
            n: 1600,
            validation_size: 100,
            split_seed: 0,
            features: FeatureConfig::default(),
            bo: BoConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Default `n` for a task.
    pub fn default_n(task: TaskKind) -> usize {
        match task {
            TaskKind::Sentiment => 1600,
            TaskKind::Pos => 2000,
        }
    }
}

/// A target domain, its source domains and the shared representation
/// resources.
#[derive(Clone, Debug)]
pub struct Setting<'a> {
    pub target: &'a DomainCorpus,
    pub sources: Vec<&'a DomainCorpus>,
    pub resources: FeatureResources<'a>,
}

/// One end of a weight transfer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferEndpoint {
    pub domain: String,
    pub task: String,
    pub model: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferSpec {
    pub source: TransferEndpoint,
    pub target: TransferEndpoint,
    pub feature_config_id: String,
}

/// A weight vector together with everything needed to re-apply it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnedWeights {
    pub weights: WeightVector,
    pub feature_config_id: String,
    pub columns: Vec<String>,
    pub seed: u64,
    pub learned_on: TransferEndpoint,
    /// Objective value on the validation split at these weights.
    pub validation_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Objective on the target test split.
    pub value: f64,
    pub selected: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub target: String,
    pub task: String,
    pub method: String,
    pub features: Option<String>,
    pub n: usize,
    pub runs: Vec<RunRecord>,
    pub mean: f64,
    /// Sample variance across runs; absent for a single run.
    pub variance: Option<f64>,
}

impl ExperimentReport {
    pub fn from_runs(
        target: &str,
        task: &str,
        method: &str,
        features: Option<String>,
        n: usize,
        runs: Vec<RunRecord>,
    ) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::invalid("a report needs at least one run"));
        }
        let k = runs.len() as f64;
        let mean = runs.iter().map(|r| r.value).sum::<f64>() / k;
        let variance = (runs.len() > 1)
            .then(|| runs.iter().map(|r| (r.value - mean) * (r.value - mean)).sum::<f64>() / (k - 1.0));
        Ok(ExperimentReport {
            target: String::from(target),
            task: String::from(task),
            method: String::from(method),
            features,
            n,
            runs,
            mean,
            variance,
        })
    }
}

/// Output of one learned-selection run.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedRun {
    pub record: RunRecord,
    pub weights: LearnedWeights,
    pub history: ObservationSet,
}

/// Returns `w ↦ J`: score the pool with `w`, train on the top `n` and
/// evaluate on `validation`. The task seed is fixed, so the evaluator is
/// deterministic.
pub fn data_selection_objective<'a>(
    pool: &'a [&'a Example],
    matrix: &'a FeatureMatrix,
    n: usize,
    stratify: bool,
    task: &'a dyn Task,
    validation: &'a [&'a Example],
    seed: u64,
) -> Result<impl FnMut(&WeightVector) -> Result<f64> + 'a> {
    if n > pool.len() {
        return Err(Error::Insufficient {
            what: "pool examples",
            needed: n,
            available: pool.len(),
        });
    }
    if matrix.n_rows() != pool.len() {
        return Err(Error::DimensionMismatch {
            left: pool.len(),
            right: matrix.n_rows(),
        });
    }
    Ok(move |w: &WeightVector| {
        let scores = score_examples(matrix, w)?;
        let sel = select_top_n(pool, &scores, n, stratify, Provenance::Baseline { name: String::new() })?;
        task.train_and_evaluate(&sel.training_set(pool), validation, seed)
    })
}

/// A target/source setting with its splits, pool and feature matrix built.
pub struct PreparedExperiment<'a> {
    config: ExperimentConfig,
    target: String,
    validation: Vec<Example>,
    test: Vec<Example>,
    pool: Vec<&'a Example>,
    excluded: Vec<String>,
    domain_text: Vec<(&'a str, Vec<&'a Example>)>,
    target_repr: ExampleRepr,
    matrix: FeatureMatrix,
    vocab: &'a Vocabulary,
}

impl<'a> PreparedExperiment<'a> {
    /// Splits the target's labeled data into validation and test, builds the
    /// target representation from validation plus unlabeled target text,
    /// pools the sources' labeled examples and computes the feature matrix.
    /// Source examples that cannot be represented (no in-vocabulary or no
    /// embedded tokens) are left out of the pool.
    pub fn new(setting: &Setting<'a>, config: ExperimentConfig) -> Result<Self> {
        config.features.validate()?;
        config.bo.validate()?;
        let res = &setting.resources;
        let split = split_validation(setting.target, config.validation_size, config.split_seed)?;
        if split.pool.is_empty() {
            return Err(Error::Insufficient {
                what: "target examples for a test split",
                needed: config.validation_size + 1,
                available: config.validation_size,
            });
        }
        let mut kinds: Vec<Representation> = Representation::ALL
            .into_iter()
            .filter(|&r| config.features.uses(r))
            .collect();
        if !kinds.contains(&Representation::Term) {
            kinds.insert(0, Representation::Term);
        }
        let target_text = split.validation.iter().chain(&setting.target.unlabeled);
        let target_repr = ExampleRepr::of_domain(target_text, &kinds, res)?;

        let mut pool = Vec::new();
        let mut excluded = Vec::new();
        for src in &setting.sources {
            if src.domain == setting.target.domain {
                return Err(Error::invalid(format!("domain `{}` is both source and target", src.domain)));
            }
            for ex in &src.labeled {
                let ok = ExampleRepr::of_tokens(&ex.tokens, &kinds, res).is_ok()
                    && (!config.features.uses_diversity()
                        || diversity_features(&ex.tokens, res.vocab, res.embeddings, config.features.renyi_alpha)
                            .is_ok());
                if ok {
                    pool.push(ex);
                } else {
                    excluded.push(ex.id.clone());
                }
            }
        }
        if pool.is_empty() {
            return Err(Error::invalid("the source pool is empty"));
        }
        let domain_text = setting
            .sources
            .iter()
            .map(|s| (s.domain.as_str(), s.all_examples().collect()))
            .collect();
        let matrix = build_feature_matrix(&pool, &target_repr, res, &config.features)?;
        Ok(PreparedExperiment {
            target: setting.target.domain.clone(),
            validation: split.validation,
            test: split.pool,
            pool,
            excluded,
            domain_text,
            target_repr,
            matrix,
            vocab: res.vocab,
            config,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn pool(&self) -> &[&'a Example] {
        &self.pool
    }

    /// Ids of source examples left out of the pool.
    pub fn excluded(&self) -> &[String] {
        &self.excluded
    }

    pub fn validation(&self) -> &[Example] {
        &self.validation
    }

    pub fn test(&self) -> &[Example] {
        &self.test
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn target_repr(&self) -> &ExampleRepr {
        &self.target_repr
    }

    /// `n`, capped at the pool size.
    pub fn effective_n(&self) -> usize {
        self.config.n.min(self.pool.len())
    }

    fn stratify(&self, task: &dyn Task) -> bool {
        task.kind().stratified()
    }

    fn features_label(&self) -> String {
        self.config.features.label()
    }

    pub fn select_with_weights(&self, w: &[f64], task: &dyn Task) -> Result<SelectionResult> {
        let scores = score_examples(&self.matrix, w)?;
        select_top_n(
            &self.pool,
            &scores,
            self.effective_n(),
            self.stratify(task),
            Provenance::Weights {
                weights: w.to_vec(),
                feature_config_id: String::from(self.matrix.config_id()),
                means: self.matrix.means().to_vec(),
                stds: self.matrix.stds().to_vec(),
            },
        )
    }

    pub fn select_baseline(&self, method: Method, task: &dyn Task, seed: u64) -> Result<SelectionResult> {
        let n = self.effective_n();
        let target = self
            .target_repr
            .term
            .as_ref()
            .ok_or_else(|| Error::invalid("target term distribution missing"))?;
        match method {
            Method::Random => baseline_random(&self.pool, n, derive_seed(seed, 2)),
            Method::JsExamples => baseline_js_examples(&self.pool, target, n, self.vocab, self.stratify(task)),
            Method::JsDomain => {
                baseline_js_domain(&self.pool, &self.domain_text, target, n, derive_seed(seed, 3), self.vocab)
            }
            Method::AllSource => Ok(SelectionResult {
                indices: (0..self.pool.len()).collect(),
                ids: self.pool.iter().map(|e| e.id.clone()).collect(),
                scores: None,
                provenance: Provenance::Baseline {
                    name: String::from("all-source"),
                },
            }),
            Method::Learned | Method::Transfer => Err(Error::invalid(format!("`{}` is not a baseline", method.name()))),
        }
    }

    fn evaluate_on_test(&self, sel: &SelectionResult, task: &dyn Task, seed: u64) -> Result<RunRecord> {
        let test: Vec<&Example> = self.test.iter().collect();
        let value = task.train_and_evaluate(&sel.training_set(&self.pool), &test, seed)?;
        Ok(RunRecord {
            seed,
            value,
            selected: sel.ids.clone(),
        })
    }

    pub fn run_baseline(&self, method: Method, task: &dyn Task, seed: u64) -> Result<RunRecord> {
        let sel = self.select_baseline(method, task, seed)?;
        self.evaluate_on_test(&sel, task, seed)
    }

    /// Optimizes `w` on the validation split, then trains on the top `n`
    /// under the best `w` and evaluates on the test split.
    pub fn run_learned(&self, task: &dyn Task, seed: u64) -> Result<LearnedRun> {
        let validation: Vec<&Example> = self.validation.iter().collect();
        let objective = data_selection_objective(
            &self.pool,
            &self.matrix,
            self.effective_n(),
            self.stratify(task),
            task,
            &validation,
            seed,
        )?;
        let bo = BoConfig {
            seed: derive_seed(seed, 1),
            maximize: true,
            ..self.config.bo.clone()
        };
        let result = optimize(objective, self.matrix.n_cols(), &bo)?;
        let sel = self.select_with_weights(&result.best.input, task)?;
        let record = self.evaluate_on_test(&sel, task, seed)?;
        let weights = LearnedWeights {
            weights: result.best.input.clone(),
            feature_config_id: String::from(self.matrix.config_id()),
            columns: self.matrix.column_names().to_vec(),
            seed,
            learned_on: TransferEndpoint {
                domain: self.target.clone(),
                task: String::from(task.kind().name()),
                model: task.name(),
            },
            validation_value: result.best.value,
        };
        Ok(LearnedRun {
            record,
            weights,
            history: result.history,
        })
    }

    /// Scores this setting's pool with frozen weights (against this pool's
    /// own normalization), then trains and evaluates. No optimization.
    pub fn apply_transferred_weights(
        &self,
        spec: &TransferSpec,
        weights: &LearnedWeights,
        task: &dyn Task,
        seed: u64,
    ) -> Result<RunRecord> {
        for found in [&spec.feature_config_id, &weights.feature_config_id] {
            if found != self.matrix.config_id() {
                return Err(Error::ConfigMismatch {
                    expected: String::from(self.matrix.config_id()),
                    found: found.clone(),
                });
            }
        }
        let sel = self.select_with_weights(&weights.weights, task)?;
        self.evaluate_on_test(&sel, task, seed)
    }

    pub fn report(&self, method: Method, task: &dyn Task, runs: Vec<RunRecord>) -> Result<ExperimentReport> {
        let features = matches!(method, Method::Learned | Method::Transfer).then(|| self.features_label());
        ExperimentReport::from_runs(
            &self.target,
            task.kind().name(),
            method.name(),
            features,
            self.effective_n(),
            runs,
        )
    }
}
