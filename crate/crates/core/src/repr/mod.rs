//! Example and domain representations: term distributions, LDA topic
//! distributions and weighted word-embedding averages.

mod embedding;
mod lda;
mod term;

pub use embedding::{embed_example, DenseVector, EmbeddingTable, DEFAULT_SMOOTHING};
pub use lda::{infer_topics, train_lda, LdaConfig, LdaModel};
pub use term::{domain_representation, term_distribution, ProbVector};
