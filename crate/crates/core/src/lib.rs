//! Learned data-selection measures for transfer learning.
//!
//! Source-domain training examples are described by similarity features
//! (divergences between an example and the target domain, over term, topic
//! and embedding representations) and diversity features (intrinsic
//! richness of the example). A linear score `S = φ(X) · wᵀ` ranks the pooled
//! source examples, and the weight vector `w ∈ [-1, 1]^l` is tuned by
//! Gaussian-process Bayesian optimization against a downstream task
//! objective measured on a small target-domain validation set.
//!
//! This crate is `no_std` (it needs `alloc`). File formats, manifests and the
//! command-line front end live in the `learnsel` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bayesopt;
pub mod corpus;
mod error;
pub mod metrics;
pub mod repr;
mod rng;
pub mod select;
pub mod synthetic;
pub mod tasks;

pub use error::{Error, Result};
pub use rng::{seeded_rng, SeededRng};
