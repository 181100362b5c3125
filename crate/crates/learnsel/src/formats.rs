//! Text formats for corpora, embeddings, feature matrices and BO histories.
//!
//! * labeled reviews: `<0|1>\t<text>` per line
//! * unlabeled text: one document per line
//! * tagged sentences: `token\ttag` rows, sentences separated by blank lines
//! * embeddings: `word v1 v2 ... vd` per line

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use learnsel_core::bayesopt::{Observation, ObservationSet};
use learnsel_core::corpus::{tokenize, Example, Label, Polarity};
use learnsel_core::metrics::{FeatureMatrix, WeightVector};
use learnsel_core::repr::EmbeddingTable;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| FormatError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Domain id from a file name: the stem up to the first dot.
pub fn domain_from_path(path: &Path) -> String {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("domain");
    name.split('.').next().unwrap_or(name).to_string()
}

/// Loads `<label>\t<text>` lines. Example ids are `<domain>:<k>` with `k`
/// counting non-blank lines from 0.
pub fn load_labeled_reviews(path: &Path, domain: &str, lowercase: bool) -> Result<Vec<Example>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, body) = line
            .split_once('\t')
            .ok_or_else(|| parse_error(path, i + 1, "expected `<label>\\t<text>`"))?;
        let polarity = Polarity::from_digit(label.trim())
            .ok_or_else(|| parse_error(path, i + 1, format!("label `{label}` is not 0 or 1")))?;
        let tokens = tokenize(body, lowercase);
        let ex = Example::new(
            format!("{domain}:{}", out.len()),
            tokens,
            Some(Label::Sentiment(polarity)),
            domain,
        )
        .map_err(|e| parse_error(path, i + 1, e.to_string()))?;
        out.push(ex);
    }
    Ok(out)
}

/// One document per non-blank line; ids are `<domain>:u<k>`.
pub fn load_unlabeled(path: &Path, domain: &str, lowercase: bool) -> Result<Vec<Example>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let tokens = tokenize(line, lowercase);
        if tokens.is_empty() {
            continue;
        }
        let id = format!("{domain}:u{}", out.len());
        out.push(Example::new(id, tokens, None, domain).expect("non-empty tokens"));
    }
    Ok(out)
}

/// Two-column `token\ttag` blocks. Tokens keep their case.
pub fn load_tagged_conll(path: &Path, domain: &str) -> Result<Vec<Example>> {
    let text = read(path)?;
    let mut out = Vec::new();
    let mut words = Vec::new();
    let mut tags = Vec::new();
    let flush = |words: &mut Vec<String>, tags: &mut Vec<String>, out: &mut Vec<Example>| {
        if !words.is_empty() {
            let id = format!("{domain}:{}", out.len());
            let ex = Example::new(id, std::mem::take(words), Some(Label::Tags(std::mem::take(tags))), domain)
                .expect("aligned tags");
            out.push(ex);
        }
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut words, &mut tags, &mut out);
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 || cols[0].is_empty() || cols[1].is_empty() {
            return Err(parse_error(
                path,
                i + 1,
                format!("expected 2 tab-separated columns, found {}", cols.len()),
            ));
        }
        words.push(cols[0].to_string());
        tags.push(cols[1].to_string());
    }
    flush(&mut words, &mut tags, &mut out);
    Ok(out)
}

/// `word v1 ... vd` rows; a repeated word keeps its last vector.
pub fn load_embeddings(path: &Path, smoothing: f64) -> Result<EmbeddingTable> {
    let text = read(path)?;
    let mut table = EmbeddingTable::new(0, smoothing).map_err(|e| parse_error(path, 0, e.to_string()))?;
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values = parts
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| parse_error(path, i + 1, format!("bad number: {e}")))?;
        if values.is_empty() {
            return Err(parse_error(path, i + 1, "row has no vector"));
        }
        if !table.is_empty() && values.len() != table.dim() {
            return Err(parse_error(
                path,
                i + 1,
                format!("dimension {} differs from {}", values.len(), table.dim()),
            ));
        }
        table
            .insert(word, values)
            .map_err(|e| parse_error(path, i + 1, e.to_string()))?;
    }
    Ok(table)
}

pub fn format_labeled_reviews<'a>(examples: impl IntoIterator<Item = &'a Example>) -> String {
    let mut s = String::new();
    for ex in examples {
        let label = ex.polarity().map_or('0', Polarity::as_digit);
        let _ = writeln!(s, "{label}\t{}", ex.tokens.join(" "));
    }
    s
}

pub fn format_unlabeled<'a>(examples: impl IntoIterator<Item = &'a Example>) -> String {
    let mut s = String::new();
    for ex in examples {
        let _ = writeln!(s, "{}", ex.tokens.join(" "));
    }
    s
}

pub fn format_conll<'a>(examples: impl IntoIterator<Item = &'a Example>) -> String {
    let mut s = String::new();
    for ex in examples {
        if let Some(tags) = ex.tags() {
            for (w, t) in ex.tokens.iter().zip(tags) {
                let _ = writeln!(s, "{w}\t{t}");
            }
            s.push('\n');
        }
    }
    s
}

/// Header of feature names, then `id<TAB>values...` per example.
pub fn format_feature_matrix(m: &FeatureMatrix) -> String {
    let mut s = format!("# {}\nid", m.config_id());
    for c in m.column_names() {
        s.push('\t');
        s.push_str(c);
    }
    s.push('\n');
    for (i, id) in m.example_ids().iter().enumerate() {
        s.push_str(id);
        for v in m.row(i) {
            let _ = write!(s, "\t{v}");
        }
        s.push('\n');
    }
    s
}

/// Metadata written as a comment line above a history table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HistoryMeta {
    pub features: String,
    pub target: String,
    pub seed: u64,
}

/// One row per evaluation: iteration, weights, objective, running best and
/// the NaN-penalty flag.
pub fn format_history(meta: &HistoryMeta, history: &ObservationSet) -> String {
    let dim = history.first().map_or(0, |o| o.input.len());
    let mut s = format!("# features={} target={} seed={}\niteration", meta.features, meta.target, meta.seed);
    for j in 0..dim {
        let _ = write!(s, "\tw{j}");
    }
    s.push_str("\ty\tbest_so_far\tpenalized\n");
    for (i, (o, best)) in history.iter().zip(history.best_so_far(true)).enumerate() {
        let _ = write!(s, "{}", i + 1);
        for w in o.input.iter() {
            let _ = write!(s, "\t{w}");
        }
        let _ = writeln!(s, "\t{}\t{best}\t{}", o.value, u8::from(o.penalized));
    }
    s
}

pub fn load_history(path: &Path) -> Result<(HistoryMeta, ObservationSet)> {
    let text = read(path)?;
    let mut meta = HistoryMeta::default();
    let mut set = ObservationSet::new();
    let mut header: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix('#') {
            for kv in comment.split_whitespace() {
                match kv.split_once('=') {
                    Some(("features", v)) => meta.features = v.to_string(),
                    Some(("target", v)) => meta.target = v.to_string(),
                    Some(("seed", v)) => meta.seed = v.parse().unwrap_or(0),
                    _ => {}
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let Some(width) = header else {
            if cols.first() != Some(&"iteration") {
                return Err(parse_error(path, i + 1, "missing `iteration` header"));
            }
            header = Some(cols.len());
            continue;
        };
        if cols.len() != width || width < 4 {
            return Err(parse_error(path, i + 1, format!("expected {width} columns")));
        }
        let nums = cols[1..width - 1]
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| parse_error(path, i + 1, format!("bad number: {e}")))?;
        let dim = width - 4;
        let input = WeightVector::new(nums[..dim].to_vec()).map_err(|e| parse_error(path, i + 1, e.to_string()))?;
        set.push(Observation {
            input,
            value: nums[dim],
            penalized: cols[width - 1] == "1",
        });
    }
    if header.is_none() {
        return Err(parse_error(path, 1, "empty history"));
    }
    Ok((meta, set))
}
