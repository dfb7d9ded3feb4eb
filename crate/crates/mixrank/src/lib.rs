//! Two-stage passage ranking: BM25 candidate retrieval followed by a tiny
//! trainable text-to-text re-ranker that can be fine-tuned on a single
//! ranking view or on a Bernoulli-mixed stream of ranking and query
//! generation views.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`corpus`]: TSV/TREC ingestion of passages, queries, triples and qrels
//! - [`bm25`]: inverted index and Okapi BM25 first-stage retrieval
//! - [`templates`]: the six case-sensitive text-to-text formulations
//! - [`sampler`]: Bernoulli instance mixing of the two training streams
//! - [`model`]: tokenizer, encoder-decoder transducer, losses, training
//! - [`scorer`]: true/false logit-trick relevance scoring and re-ranking
//! - [`eval`]: MRR@10, depth sweeps, paired t-tests, confidence intervals
//! - [`commands`]: the CLI entry points (`mixrank` binary)

pub mod bm25;
pub mod commands;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod model;
pub mod sampler;
pub mod scorer;
pub mod synth;
pub mod templates;
pub mod text;
pub mod trec;

pub use error::{Error, Result};
