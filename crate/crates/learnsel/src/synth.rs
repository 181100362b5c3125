//! Writes a synthetic benchmark to disk together with a runnable manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use learnsel_core::corpus::DomainCorpus;
use learnsel_core::synthetic::{pos_benchmark, sentiment_benchmark, PosBenchmarkConfig, SentimentBenchmarkConfig};
use learnsel_core::tasks::TaskKind;

use crate::formats::{format_conll, format_labeled_reviews, format_unlabeled, write_file};

#[derive(Clone, Debug)]
pub struct SynthOptions {
    pub task: TaskKind,
    pub seed: u64,
    pub n: usize,
    pub iterations: usize,
    pub runs: u64,
    pub features: String,
}

impl SynthOptions {
    /// The desk-scale sentiment setup: n = 200 from three 500-example
    /// sources, 100 BO iterations, 5 seeds.
    pub fn new(task: TaskKind) -> Self {
        SynthOptions {
            task,
            seed: 0,
            n: 200,
            iterations: 100,
            runs: 5,
            features: "term+diversity".to_string(),
        }
    }
}

fn write_domain(dir: &Path, task: TaskKind, c: &DomainCorpus) -> anyhow::Result<(String, String)> {
    let labeled = match task {
        TaskKind::Sentiment => (format!("{}.tsv", c.domain), format_labeled_reviews(&c.labeled)),
        TaskKind::Pos => (format!("{}.conll", c.domain), format_conll(&c.labeled)),
    };
    write_file(&dir.join(&labeled.0), &labeled.1)?;
    let unlabeled = format!("{}.txt", c.domain);
    write_file(&dir.join(&unlabeled), &format_unlabeled(&c.unlabeled))?;
    Ok((labeled.0, unlabeled))
}

/// Writes the domain files and `manifest.toml` into `dir`; returns the
/// manifest path.
pub fn write_benchmark(dir: &Path, opts: &SynthOptions) -> anyhow::Result<PathBuf> {
    let bench = match opts.task {
        TaskKind::Sentiment => sentiment_benchmark(&SentimentBenchmarkConfig {
            seed: opts.seed,
            ..SentimentBenchmarkConfig::default()
        })?,
        TaskKind::Pos => pos_benchmark(&PosBenchmarkConfig {
            seed: opts.seed,
            ..PosBenchmarkConfig::default()
        })?,
    };
    let seeds: Vec<String> = (0..opts.runs).map(|s| s.to_string()).collect();
    let mut m = String::new();
    let _ = writeln!(m, "task = \"{}\"", opts.task.name());
    let _ = writeln!(m, "output_dir = \"out\"");
    let _ = writeln!(m, "n = {}", opts.n);
    let _ = writeln!(m, "seeds = [{}]", seeds.join(", "));
    let _ = writeln!(m, "features = \"{}\"", opts.features);
    let _ = writeln!(m, "\n[bo]\niterations = {}", opts.iterations);
    for (c, target) in std::iter::once((&bench.target, true)).chain(bench.sources.iter().map(|s| (s, false))) {
        let (labeled, unlabeled) = write_domain(dir, opts.task, c)?;
        let _ = writeln!(m, "\n[[domain]]\nid = \"{}\"\nlabeled = \"{labeled}\"\nunlabeled = \"{unlabeled}\"", c.domain);
        if target {
            m.push_str("target = true\n");
        }
    }
    let path = dir.join("manifest.toml");
    write_file(&path, &m)?;
    Ok(path)
}
