//! Corpus-mining toolchain for self-admitted technical debt (SATD) in
//! build-system specification files.
//!
//! The pipeline scans a corpus manifest for build files (Autotools, CMake,
//! Maven, Ant, Ivy), extracts their comments, tags SATD by keyword,
//! clusters near-duplicate SATD comments into clone groups with density
//! clustering over cosine distance, and quantifies clone prevalence,
//! surrounding-statement similarity, and authorship.

pub mod authorship;
pub mod cluster;
pub mod context;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod extract;
pub mod pipeline;
pub mod stats;
pub mod types;

pub use error::{Error, Result};

/// Tool version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
