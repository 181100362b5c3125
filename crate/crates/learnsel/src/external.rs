//! Plug-in evaluator that shells out to a user command.

use std::fmt;
use std::path::Path;
use std::process::Command;

use learnsel_core::corpus::Example;
use learnsel_core::tasks::{Task, TaskKind};
use learnsel_core::{Error, Result};

use crate::formats::{format_conll, format_labeled_reviews, write_file};

/// Runs `command` through `sh -c` after writing the training and evaluation
/// examples in the task's corpus format. `{train}`, `{eval}` and `{seed}`
/// are substituted; the last non-empty line of stdout must parse as `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalTask {
    pub kind: TaskKind,
    pub command: String,
    pub name: String,
}

impl ExternalTask {
    pub fn new(kind: TaskKind, command: impl Into<String>) -> Self {
        ExternalTask {
            kind,
            command: command.into(),
            name: "external".to_string(),
        }
    }

    fn write_examples(&self, path: &Path, examples: &[&Example]) -> Result<()> {
        let text = match self.kind {
            TaskKind::Sentiment => format_labeled_reviews(examples.iter().copied()),
            TaskKind::Pos => format_conll(examples.iter().copied()),
        };
        write_file(path, &text).map_err(|e| Error::Evaluator(e.to_string()))
    }
}

fn quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

struct Captured<'a>(&'a [u8]);

impl fmt::Display for Captured<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(String::from_utf8_lossy(self.0).trim_end())
    }
}

impl Task for ExternalTask {
    fn kind(&self) -> TaskKind {
        self.kind
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn train_and_evaluate(&self, train: &[&Example], eval: &[&Example], seed: u64) -> Result<f64> {
        let dir = tempfile::tempdir().map_err(|e| Error::Evaluator(format!("cannot create work dir: {e}")))?;
        let ext = match self.kind {
            TaskKind::Sentiment => "tsv",
            TaskKind::Pos => "conll",
        };
        let train_path = dir.path().join(format!("train.{ext}"));
        let eval_path = dir.path().join(format!("eval.{ext}"));
        self.write_examples(&train_path, train)?;
        self.write_examples(&eval_path, eval)?;
        let cmd = self
            .command
            .replace("{train}", &quote(&train_path))
            .replace("{eval}", &quote(&eval_path))
            .replace("{seed}", &seed.to_string());
        let out = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .output()
            .map_err(|e| Error::Evaluator(format!("cannot run `{cmd}`: {e}")))?;
        if !out.status.success() {
            return Err(Error::Evaluator(format!(
                "`{cmd}` failed ({})\nstdout: {}\nstderr: {}",
                out.status,
                Captured(&out.stdout),
                Captured(&out.stderr)
            )));
        }
        let stdout = String::from_utf8_lossy(&out.stdout);
        let last = stdout.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("");
        last.trim().parse::<f64>().map_err(|_| {
            Error::Evaluator(format!(
                "`{cmd}` did not print a number\nstdout: {}\nstderr: {}",
                Captured(&out.stdout),
                Captured(&out.stderr)
            ))
        })
    }
}
