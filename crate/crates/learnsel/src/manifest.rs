use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use learnsel_core::bayesopt::BoConfig;
use learnsel_core::metrics::{FeatureConfig, Representation};
use learnsel_core::repr::{LdaConfig, DEFAULT_SMOOTHING};
use learnsel_core::select::ExperimentConfig;
use learnsel_core::tasks::{SentimentConfig, TaggerConfig, TaskKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainEntry {
    pub id: String,
    /// Labeled reviews or tagged sentences, depending on the task.
    pub labeled: PathBuf,
    pub unlabeled: Option<PathBuf>,
    #[serde(default)]
    pub target: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalEntry {
    /// Shell command; `{train}`, `{eval}` and `{seed}` are substituted.
    pub command: String,
    #[serde(default = "default_model_name")]
    pub name: String,
}

fn default_model_name() -> String {
    "external".to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub task: TaskKind,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Defaults to 1600 for sentiment and 2000 for POS.
    pub n: Option<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default = "default_validation")]
    pub validation_size: usize,
    #[serde(default = "default_vocab")]
    pub vocab_size: usize,
    #[serde(default = "default_true")]
    pub lowercase: bool,
    #[serde(default = "default_features")]
    pub features: String,
    #[serde(default = "default_alpha")]
    pub renyi_alpha: f64,
    pub embeddings: Option<PathBuf>,
    #[serde(default = "default_smoothing")]
    pub embedding_smoothing: f64,
    #[serde(default)]
    pub bo: BoConfig,
    #[serde(default)]
    pub lda: LdaConfig,
    #[serde(default)]
    pub sentiment: SentimentConfig,
    #[serde(default)]
    pub tagger: TaggerConfig,
    pub external: Option<ExternalEntry>,
    #[serde(rename = "domain")]
    pub domains: Vec<DomainEntry>,
    /// Directory relative paths are resolved against; set on load.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_validation() -> usize {
    100
}
fn default_vocab() -> usize {
    10_000
}
fn default_true() -> bool {
    true
}
fn default_features() -> String {
    "term+diversity".to_string()
}
fn default_alpha() -> f64 {
    0.99
}
fn default_smoothing() -> f64 {
    DEFAULT_SMOOTHING
}

impl Manifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
        let mut m: Manifest = toml::from_str(&text).with_context(|| format!("invalid manifest {}", path.display()))?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let targets = self.domains.iter().filter(|d| d.target).count();
        if targets != 1 {
            bail!("exactly one domain must be marked `target = true` (found {targets})");
        }
        if self.domains.len() < 2 {
            bail!("at least one source domain is required");
        }
        let mut ids: Vec<&str> = self.domains.iter().map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            bail!("duplicate domain ids");
        }
        if self.seeds.is_empty() {
            bail!("`seeds` must not be empty");
        }
        self.feature_config(None)?;
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn target(&self) -> &DomainEntry {
        self.domains.iter().find(|d| d.target).expect("validated")
    }

    pub fn feature_config(&self, spec: Option<&str>) -> anyhow::Result<FeatureConfig> {
        let mut cfg = FeatureConfig::parse_feature_set(spec.unwrap_or(&self.features))
            .map_err(|e| anyhow::anyhow!("invalid feature set: {e}"))?;
        cfg.renyi_alpha = self.renyi_alpha;
        cfg.validate().map_err(|e| anyhow::anyhow!("invalid feature set: {e}"))?;
        Ok(cfg)
    }

    /// Whether ingest must train LDA / load embeddings for `features`.
    pub fn needs(&self, features: &FeatureConfig) -> (bool, bool) {
        (
            features.uses(Representation::Topic),
            features.uses(Representation::Embedding) || (features.uses_diversity() && self.embeddings.is_some()),
        )
    }

    pub fn experiment_config(&self, features: FeatureConfig, n: Option<usize>, iterations: Option<usize>) -> ExperimentConfig {
        let mut bo = self.bo.clone();
        if let Some(it) = iterations {
            bo.iterations = it;
            bo.initial = bo.initial.min(it);
        }
        ExperimentConfig {
            task: self.task,
            n: n.or(self.n).unwrap_or_else(|| ExperimentConfig::default_n(self.task)),
            validation_size: self.validation_size,
            split_seed: self.split_seed,
            features,
            bo,
        }
    }
}
