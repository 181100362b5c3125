//! Report, weight and history files under the output directory.
//!
//! Names are stable so reruns overwrite in place:
//! `reports/<target>.<method>[.<features>].{txt,jsonl,json}`,
//! `weights/<target>.<features>.seed<s>.json`,
//! `history/<target>.<features>.seed<s>.tsv`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use learnsel_core::select::{ExperimentReport, LearnedWeights};

use crate::formats::write_file;

/// File-name-safe form of a feature label or domain id.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '+') { c } else { '_' })
        .collect()
}

pub fn report_stem(out: &Path, report: &ExperimentReport, suffix: Option<&str>) -> PathBuf {
    let mut name = format!("{}.{}", sanitize(&report.target), report.method);
    for part in report.features.as_deref().into_iter().chain(suffix) {
        name.push('.');
        name.push_str(&sanitize(part));
    }
    out.join("reports").join(name)
}

pub fn weights_path(out: &Path, target: &str, features: &str, seed: u64) -> PathBuf {
    out.join("weights")
        .join(format!("{}.{}.seed{seed}.json", sanitize(target), sanitize(features)))
}

pub fn history_path(out: &Path, target: &str, features: &str, seed: u64) -> PathBuf {
    out.join("history")
        .join(format!("{}.{}.seed{seed}.tsv", sanitize(target), sanitize(features)))
}

pub fn format_table(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "target   {}", r.target);
    let _ = writeln!(s, "task     {}", r.task);
    let _ = writeln!(s, "method   {}", r.method);
    if let Some(f) = &r.features {
        let _ = writeln!(s, "features {f}");
    }
    let _ = writeln!(s, "n        {}", r.n);
    let _ = writeln!(s, "\nseed\taccuracy\tselected");
    for run in &r.runs {
        let _ = writeln!(s, "{}\t{:.6}\t{}", run.seed, run.value, run.selected.len());
    }
    let _ = writeln!(s, "\nmean\t{:.6}", r.mean);
    match r.variance {
        Some(v) => {
            let _ = writeln!(s, "variance\t{v:.6e}");
        }
        None => s.push_str("variance\t-\n"),
    }
    s
}

pub fn format_jsonl(r: &ExperimentReport) -> anyhow::Result<String> {
    let mut s = String::new();
    for run in &r.runs {
        let row = serde_json::json!({
            "target": r.target,
            "task": r.task,
            "method": r.method,
            "features": r.features,
            "n": r.n,
            "seed": run.seed,
            "value": run.value,
        });
        s.push_str(&serde_json::to_string(&row)?);
        s.push('\n');
    }
    Ok(s)
}

/// Writes the three report files; returns the JSON path.
pub fn write_report(out: &Path, r: &ExperimentReport, suffix: Option<&str>) -> anyhow::Result<PathBuf> {
    let stem = report_stem(out, r, suffix);
    let with_ext = |ext: &str| {
        let mut p = stem.clone().into_os_string();
        p.push(".");
        p.push(ext);
        PathBuf::from(p)
    };
    write_file(&with_ext("txt"), &format_table(r))?;
    write_file(&with_ext("jsonl"), &format_jsonl(r)?)?;
    let json = with_ext("json");
    write_file(&json, &serde_json::to_string_pretty(r)?)?;
    Ok(json)
}

pub fn write_weights(path: &Path, w: &LearnedWeights) -> anyhow::Result<()> {
    write_file(path, &serde_json::to_string_pretty(w)?)?;
    Ok(())
}

pub fn load_weights(path: &Path) -> anyhow::Result<LearnedWeights> {
    use anyhow::Context;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid weight file {}", path.display()))
}

pub fn load_report(path: &Path) -> anyhow::Result<ExperimentReport> {
    use anyhow::Context;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid report {}", path.display()))
}
