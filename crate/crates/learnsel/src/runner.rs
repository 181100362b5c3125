//! Drives one `select` invocation: ingest, prepare, run each seed, write
//! artifacts.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use learnsel_core::metrics::{FeatureConfig, FeatureResources};
use learnsel_core::select::{
    ExperimentReport, LearnedWeights, Method, PreparedExperiment, RunRecord, Setting, TransferEndpoint, TransferSpec,
};
use learnsel_core::tasks::{SentimentTask, TaggingTask, Task, TaskKind};

use crate::cache::{ingest, Ingested};
use crate::external::ExternalTask;
use crate::formats::{format_feature_matrix, format_history, write_file, HistoryMeta};
use crate::manifest::Manifest;
use crate::report::{history_path, load_weights, sanitize, weights_path, write_report, write_weights};

#[derive(Clone, Debug, Default)]
pub struct SelectOptions {
    pub seeds: Option<Vec<u64>>,
    pub iterations: Option<usize>,
    pub n: Option<usize>,
    pub features: Option<String>,
    pub weights: Option<PathBuf>,
    pub dump_features: bool,
}

#[derive(Clone, Debug)]
pub struct SelectOutcome {
    pub report: ExperimentReport,
    pub report_path: PathBuf,
    pub weight_files: Vec<PathBuf>,
    pub excluded: usize,
}

pub fn make_task(m: &Manifest) -> Box<dyn Task> {
    if let Some(ext) = &m.external {
        let mut t = ExternalTask::new(m.task, ext.command.clone());
        t.name = ext.name.clone();
        return Box::new(t);
    }
    match m.task {
        TaskKind::Sentiment => Box::new(SentimentTask {
            config: m.sentiment.clone(),
        }),
        TaskKind::Pos => Box::new(TaggingTask {
            config: m.tagger.clone(),
        }),
    }
}

/// A manifest with its artifacts loaded for one feature configuration.
pub struct Session {
    pub manifest: Manifest,
    pub features: FeatureConfig,
    pub ingested: Ingested,
}

impl Session {
    pub fn open(m: &Manifest, features: Option<&str>) -> anyhow::Result<Self> {
        let features = m.feature_config(features)?;
        let (lda, emb) = m.needs(&features);
        if emb && m.embeddings.is_none() && features.uses(learnsel_core::metrics::Representation::Embedding) {
            bail!("feature set `{}` needs `embeddings` in the manifest", features.label());
        }
        let ingested = ingest(m, lda, emb)?;
        Ok(Session {
            manifest: m.clone(),
            features,
            ingested,
        })
    }

    pub fn prepare(&self, n: Option<usize>, iterations: Option<usize>) -> anyhow::Result<PreparedExperiment<'_>> {
        let m = &self.manifest;
        let ing = &self.ingested;
        let setting = Setting {
            target: ing.target(m),
            sources: ing.sources(m),
            resources: FeatureResources {
                vocab: &ing.vocab,
                lda: ing.lda.as_ref(),
                embeddings: ing.embeddings.as_ref(),
            },
        };
        let config = m.experiment_config(self.features.clone(), n, iterations);
        Ok(PreparedExperiment::new(&setting, config)?)
    }
}

/// Runs `method` for each seed. Learned runs also write their weight and
/// history files. Returns the records in seed order.
pub fn run_seeds(
    session: &Session,
    prepared: &PreparedExperiment<'_>,
    method: Method,
    opts: &SelectOptions,
    seeds: &[u64],
) -> anyhow::Result<(Vec<RunRecord>, Vec<PathBuf>)> {
    let m = &session.manifest;
    let task = make_task(m);
    let out = m.output_dir();
    let label = session.features.label();
    let mut records = Vec::new();
    let mut files = Vec::new();
    let transferred = match method {
        Method::Transfer => {
            let path = opts.weights.as_ref().context("--weights is required for method `transfer`")?;
            Some(load_weights(path)?)
        }
        _ => None,
    };
    for &seed in seeds {
        let record = match method {
            Method::Learned => {
                let run = prepared.run_learned(task.as_ref(), seed)?;
                let wp = weights_path(&out, prepared.target(), &label, seed);
                write_weights(&wp, &run.weights)?;
                let meta = HistoryMeta {
                    features: sanitize(&label),
                    target: prepared.target().to_string(),
                    seed,
                };
                write_file(&history_path(&out, prepared.target(), &label, seed), &format_history(&meta, &run.history))?;
                files.push(wp);
                run.record
            }
            Method::Transfer => {
                let w: &LearnedWeights = transferred.as_ref().expect("loaded above");
                let spec = TransferSpec {
                    source: w.learned_on.clone(),
                    target: TransferEndpoint {
                        domain: prepared.target().to_string(),
                        task: m.task.name().to_string(),
                        model: task.name(),
                    },
                    feature_config_id: w.feature_config_id.clone(),
                };
                prepared
                    .apply_transferred_weights(&spec, w, task.as_ref(), seed)
                    .with_context(|| format!("cannot apply weights from {}", opts.weights.as_ref().unwrap().display()))?
            }
            baseline => prepared.run_baseline(baseline, task.as_ref(), seed)?,
        };
        records.push(record);
    }
    Ok((records, files))
}

/// File-name suffix distinguishing transfer reports by weight origin.
pub fn transfer_suffix(w: &LearnedWeights) -> String {
    format!(
        "from-{}-{}-seed{}",
        sanitize(&w.learned_on.domain),
        sanitize(&w.learned_on.task),
        w.seed
    )
}

/// Writes the report for `records` and returns the outcome.
pub fn finish(
    session: &Session,
    prepared: &PreparedExperiment<'_>,
    method: Method,
    opts: &SelectOptions,
    records: Vec<RunRecord>,
    weight_files: Vec<PathBuf>,
) -> anyhow::Result<SelectOutcome> {
    let task = make_task(&session.manifest);
    let report = prepared.report(method, task.as_ref(), records)?;
    let out = session.manifest.output_dir();
    let suffix = match (method, &opts.weights) {
        (Method::Transfer, Some(p)) => Some(transfer_suffix(&load_weights(p)?)),
        _ => None,
    };
    let report_path = write_report(&out, &report, suffix.as_deref())?;
    if opts.dump_features {
        let p = out
            .join("features")
            .join(format!("{}.{}.tsv", sanitize(prepared.target()), sanitize(&session.features.label())));
        write_file(&p, &format_feature_matrix(prepared.matrix()))?;
    }
    Ok(SelectOutcome {
        report,
        report_path,
        weight_files,
        excluded: prepared.excluded().len(),
    })
}

/// `select` in a single process.
pub fn run_select(m: &Manifest, method: Method, opts: &SelectOptions) -> anyhow::Result<SelectOutcome> {
    let session = Session::open(m, opts.features.as_deref())?;
    let prepared = session.prepare(opts.n, opts.iterations)?;
    let seeds = opts.seeds.clone().unwrap_or_else(|| m.seeds.clone());
    let (records, files) = run_seeds(&session, &prepared, method, opts, &seeds)?;
    finish(&session, &prepared, method, opts, records, files)
}

/// Reads records written by a worker process.
pub fn load_records(path: &Path) -> anyhow::Result<(Vec<RunRecord>, Vec<PathBuf>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_records(path: &Path, records: &[RunRecord], files: &[PathBuf]) -> anyhow::Result<()> {
    write_file(path, &serde_json::to_string(&(records, files))?)?;
    Ok(())
}
