//! Corpus-scale text novelty metrics for scholarly literature.
//!
//! The crate turns a chronologically ordered publication corpus into
//! per-paper novelty measurements:
//!
//! * [`corpus`] ingests JSONL records, rebuilds abstracts from inverted
//!   indexes, cleans the corpus and builds the historical baseline dictionary.
//! * [`textproc`] tokenizes, tags, chunks and lemmatizes titles and abstracts
//!   into deduplicated words, noun phrases and their pairwise combinations.
//! * [`novelty`] finds the first paper to use every term and counts later
//!   reuse with a sharded, disk-spilling two-pass engine.
//! * [`semdist`] computes embedding distance to the closest recent paper.
//! * [`citemetrics`] computes the citation baselines (atypicality,
//!   first-pair journal distance, disruption).
//! * [`stats`] holds the validation machinery: matching, rank tests, GLMs,
//!   classification metrics, marginal effects and percentile buckets.
//! * [`pipeline`] wires the stages together behind a config file and writes
//!   reproducible TSV/JSON artifacts.

pub mod citemetrics;
pub mod corpus;
pub mod error;
pub mod novelty;
pub mod pipeline;
pub mod semdist;
pub mod stats;
pub mod synth;
pub mod textproc;

pub use error::{Error, Result};
