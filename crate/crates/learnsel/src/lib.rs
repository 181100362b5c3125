//! File formats, manifests, the ingest cache and the `learnsel` command line
//! around `learnsel-core`.

pub mod cache;
pub mod cli;
pub mod curve;
pub mod external;
pub mod formats;
pub mod manifest;
pub mod report;
pub mod runner;
pub mod synth;
