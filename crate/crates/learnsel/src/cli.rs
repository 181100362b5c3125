use std::ffi::OsString;
use std::path::PathBuf;
use std::process::{Command, ExitCode};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use learnsel_core::select::Method;
use learnsel_core::tasks::TaskKind;

use crate::cache::ingest;
use crate::curve::curve_table;
use crate::formats::{load_history, write_file};
use crate::manifest::Manifest;
use crate::runner::{finish, load_records, run_seeds, save_records, SelectOptions, Session};
use crate::synth::{write_benchmark, SynthOptions};

#[derive(Debug, Parser)]
#[command(name = "learnsel", version, about = "Learned data selection for domain adaptation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Validate and cache corpora, vocabulary, LDA model and embeddings.
    Ingest {
        manifest: PathBuf,
        /// Feature set to prepare for (defaults to the manifest's).
        #[arg(long)]
        features: Option<String>,
    },
    /// Run a selection method and write its report.
    Select(SelectArgs),
    /// Turn BO history files into an iteration vs best-so-far table.
    Curve {
        #[arg(required = true)]
        histories: Vec<PathBuf>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic benchmark and a manifest for it.
    Synth {
        #[arg(long, value_parser = parse_task)]
        task: TaskKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Number of run seeds listed in the manifest.
        #[arg(long)]
        runs: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    pub manifest: PathBuf,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Weight file from a learned run; required for `transfer`.
    #[arg(long, required_if_eq("method", "transfer"))]
    pub weights: Option<PathBuf>,
    /// Comma-separated run seeds.
    #[arg(long, value_delimiter = ',')]
    pub seed: Option<Vec<u64>>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub features: Option<String>,
    /// Worker processes; seeds are split between them.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write the feature matrix.
    #[arg(long)]
    pub dump_features: bool,
    #[arg(long, hide = true)]
    pub records: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method `{s}` (expected one of {})", names.join(", "))
    })
}

fn parse_task(s: &str) -> Result<TaskKind, String> {
    TaskKind::parse(s).ok_or_else(|| format!("unknown task `{s}` (expected sentiment or pos)"))
}

impl SelectArgs {
    fn options(&self) -> SelectOptions {
        SelectOptions {
            seeds: self.seed.clone(),
            iterations: self.iterations,
            n: self.n,
            features: self.features.clone(),
            weights: self.weights.clone(),
            dump_features: self.dump_features,
        }
    }

    /// Arguments forwarded to a worker, minus seeds and jobs.
    fn forwarded(&self) -> Vec<OsString> {
        let mut a: Vec<OsString> = vec!["select".into(), self.manifest.clone().into()];
        a.push("--method".into());
        a.push(self.method.name().into());
        if let Some(w) = &self.weights {
            a.push("--weights".into());
            a.push(w.clone().into());
        }
        if let Some(i) = self.iterations {
            a.push(format!("--iterations={i}").into());
        }
        if let Some(n) = self.n {
            a.push(format!("--n={n}").into());
        }
        if let Some(f) = &self.features {
            a.push(format!("--features={f}").into());
        }
        a
    }
}

fn cmd_select(args: &SelectArgs) -> anyhow::Result<()> {
    let m = Manifest::load(&args.manifest)?;
    let opts = args.options();
    let session = Session::open(&m, opts.features.as_deref())?;
    let prepared = session.prepare(opts.n, opts.iterations)?;
    let seeds = opts.seeds.clone().unwrap_or_else(|| m.seeds.clone());
    if let Some(path) = &args.records {
        let (records, files) = run_seeds(&session, &prepared, args.method, &opts, &seeds)?;
        return save_records(path, &records, &files);
    }
    let jobs = args.jobs.clamp(1, seeds.len().max(1));
    let (records, files) = if jobs == 1 {
        run_seeds(&session, &prepared, args.method, &opts, &seeds)?
    } else {
        run_workers(args, &seeds, jobs)?
    };
    let outcome = finish(&session, &prepared, args.method, &opts, records, files)?;
    if outcome.excluded > 0 {
        eprintln!("note: {} source examples could not be represented and were left out", outcome.excluded);
    }
    let r = &outcome.report;
    match r.variance {
        Some(v) => println!("{} {} mean={:.4} variance={v:.3e} runs={}", r.target, r.method, r.mean, r.runs.len()),
        None => println!("{} {} mean={:.4} runs=1", r.target, r.method, r.mean),
    }
    println!("report: {}", outcome.report_path.display());
    for w in &outcome.weight_files {
        println!("weights: {}", w.display());
    }
    Ok(())
}

fn run_workers(
    args: &SelectArgs,
    seeds: &[u64],
    jobs: usize,
) -> anyhow::Result<(Vec<learnsel_core::select::RunRecord>, Vec<PathBuf>)> {
    let exe = std::env::current_exe().context("cannot locate the learnsel executable")?;
    let tmp = tempfile::tempdir()?;
    let chunk = seeds.len().div_ceil(jobs);
    let mut children = Vec::new();
    for (k, part) in seeds.chunks(chunk).enumerate() {
        let out = tmp.path().join(format!("records{k}.json"));
        let list: Vec<String> = part.iter().map(u64::to_string).collect();
        let child = Command::new(&exe)
            .args(args.forwarded())
            .arg(format!("--seed={}", list.join(",")))
            .arg("--records")
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::piped())
            .spawn()
            .context("cannot start worker process")?;
        children.push((child, out));
    }
    let mut records = Vec::new();
    let mut files = Vec::new();
    let mut failure = None;
    for (child, out) in children {
        let output = child.wait_with_output()?;
        if !output.status.success() {
            failure.get_or_insert_with(|| String::from_utf8_lossy(&output.stderr).trim().to_string());
            continue;
        }
        let (r, f) = load_records(&out)?;
        records.extend(r);
        files.extend(f);
    }
    if let Some(msg) = failure {
        bail!("worker failed: {msg}");
    }
    Ok((records, files))
}

fn cmd_curve(histories: &[PathBuf], out: Option<&PathBuf>) -> anyhow::Result<()> {
    let loaded = histories
        .iter()
        .map(|p| load_history(p).map_err(anyhow::Error::from))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let table = curve_table(&loaded);
    match out {
        Some(p) => write_file(p, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Cmd::Ingest { manifest, features } => {
            let m = Manifest::load(&manifest)?;
            let f = m.feature_config(features.as_deref())?;
            let (lda, emb) = m.needs(&f);
            let ing = ingest(&m, lda, emb)?;
            let examples: usize = ing.corpora.iter().map(|c| c.labeled.len() + c.unlabeled.len()).sum();
            println!(
                "{} {}: {} domains, {} examples, vocabulary {}",
                if ing.hit { "cached" } else { "ingested" },
                ing.dir.display(),
                ing.corpora.len(),
                examples,
                ing.vocab.len()
            );
            Ok(())
        }
        Cmd::Select(args) => cmd_select(&args),
        Cmd::Curve { histories, out } => cmd_curve(&histories, out.as_ref()),
        Cmd::Synth {
            task,
            out,
            seed,
            n,
            iterations,
            runs,
        } => {
            let mut o = SynthOptions::new(task);
            o.seed = seed;
            o.n = n.unwrap_or(o.n);
            o.iterations = iterations.unwrap_or(o.iterations);
            o.runs = runs.unwrap_or(o.runs);
            let p = write_benchmark(&out, &o)?;
            println!("manifest: {}", p.display());
            Ok(())
        }
    }
}

/// Parses the process arguments and runs. Usage errors exit with 2, failed
/// runs with 1.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
