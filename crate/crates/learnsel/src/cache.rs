//! Content-addressed ingest cache.
//!
//! The key hashes every setting that affects the artifacts together with
//! the bytes of every input file, so an unchanged manifest is a cache hit
//! and any edit to a data file is a miss.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use learnsel_core::corpus::{build_vocabulary, DomainCorpus, Vocabulary};
use learnsel_core::repr::{train_lda, EmbeddingTable, LdaConfig, LdaModel};
use learnsel_core::tasks::TaskKind;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::formats::{load_embeddings, load_labeled_reviews, load_tagged_conll, load_unlabeled, write_file};
use crate::manifest::Manifest;

#[derive(Serialize)]
struct KeyInputs<'a> {
    version: u32,
    task: TaskKind,
    lowercase: bool,
    vocab_size: usize,
    lda: Option<&'a LdaConfig>,
    embedding_smoothing: Option<f64>,
    domains: Vec<(&'a str, bool, bool)>,
}

/// Loaded (or freshly built) artifacts for a manifest.
#[derive(Clone, Debug)]
pub struct Ingested {
    /// In manifest order.
    pub corpora: Vec<DomainCorpus>,
    pub vocab: Vocabulary,
    pub lda: Option<LdaModel>,
    pub embeddings: Option<EmbeddingTable>,
    pub dir: PathBuf,
    pub hit: bool,
}

impl Ingested {
    pub fn target(&self, m: &Manifest) -> &DomainCorpus {
        let id = &m.target().id;
        self.corpora.iter().find(|c| &c.domain == id).expect("target ingested")
    }

    pub fn sources(&self, m: &Manifest) -> Vec<&DomainCorpus> {
        let id = &m.target().id;
        self.corpora.iter().filter(|c| &c.domain != id).collect()
    }
}

fn read_bytes(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn cache_key(m: &Manifest, with_lda: bool, with_embeddings: bool) -> anyhow::Result<String> {
    let inputs = KeyInputs {
        version: 1,
        task: m.task,
        lowercase: m.lowercase,
        vocab_size: m.vocab_size,
        lda: with_lda.then_some(&m.lda),
        embedding_smoothing: with_embeddings.then_some(m.embedding_smoothing),
        domains: m
            .domains
            .iter()
            .map(|d| (d.id.as_str(), d.target, d.unlabeled.is_some()))
            .collect(),
    };
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&inputs)?);
    for d in &m.domains {
        let files = std::iter::once(&d.labeled).chain(d.unlabeled.as_ref());
        for f in files {
            let bytes = read_bytes(&m.resolve(f))?;
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
        }
    }
    if with_embeddings {
        if let Some(e) = &m.embeddings {
            h.update(read_bytes(&m.resolve(e))?);
        }
    }
    Ok(hex::encode(h.finalize()))
}

fn save<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    write_file(&dir.join(name), &serde_json::to_string(value)?)?;
    Ok(())
}

fn load<T: DeserializeOwned>(dir: &Path, name: &str) -> anyhow::Result<T> {
    let p = dir.join(name);
    let text = fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("corrupt cache file {}", p.display()))
}

fn load_corpora(m: &Manifest) -> anyhow::Result<Vec<DomainCorpus>> {
    m.domains
        .iter()
        .map(|d| {
            let path = m.resolve(&d.labeled);
            let labeled = match m.task {
                TaskKind::Sentiment => load_labeled_reviews(&path, &d.id, m.lowercase)?,
                TaskKind::Pos => load_tagged_conll(&path, &d.id)?,
            };
            let unlabeled = match &d.unlabeled {
                Some(u) => load_unlabeled(&m.resolve(u), &d.id, m.lowercase)?,
                None => Vec::new(),
            };
            DomainCorpus::new(d.id.clone(), labeled, unlabeled).map_err(anyhow::Error::from)
        })
        .collect()
}

const COMPLETE: &str = "complete";

/// Validates and caches corpora, vocabulary and (when requested) the LDA
/// model and the vocabulary-restricted embedding table. Artifacts are
/// always returned as read back from the cache, so a hit and a miss yield
/// identical values.
pub fn ingest(m: &Manifest, with_lda: bool, with_embeddings: bool) -> anyhow::Result<Ingested> {
    let with_embeddings = with_embeddings && m.embeddings.is_some();
    let key = cache_key(m, with_lda, with_embeddings)?;
    let dir = m.output_dir().join("cache").join(&key);
    let hit = dir.join(COMPLETE).exists();
    if !hit {
        let corpora = load_corpora(m)?;
        let vocab = build_vocabulary(&corpora, m.vocab_size)?;
        save(&dir, "corpora.json", &corpora)?;
        save(&dir, "vocab.json", &vocab)?;
        if with_lda {
            let docs: Vec<&[String]> = corpora
                .iter()
                .flat_map(|c| c.all_examples())
                .map(|e| e.tokens.as_slice())
                .collect();
            let lda = train_lda(docs, &vocab, &m.lda)?;
            save(&dir, "lda.json", &lda)?;
        }
        if with_embeddings {
            let path = m.resolve(m.embeddings.as_ref().expect("checked"));
            let mut table = load_embeddings(&path, m.embedding_smoothing)?;
            table.restrict_to(&vocab);
            save(&dir, "embeddings.json", &table)?;
        }
        write_file(&dir.join(COMPLETE), &key)?;
    }
    Ok(Ingested {
        corpora: load(&dir, "corpora.json")?,
        vocab: load(&dir, "vocab.json")?,
        lda: if with_lda { Some(load(&dir, "lda.json")?) } else { None },
        embeddings: if with_embeddings {
            Some(load(&dir, "embeddings.json")?)
        } else {
            None
        },
        dir,
        hit,
    })
}
