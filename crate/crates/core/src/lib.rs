//! Bounded-resource streaming engine for multi-label text classification.
//!
//! Documents arrive as an unbounded stream and are processed one at a time
//! with constant memory and constant cost per document:
//!
//! * [`text`] normalizes raw text into token sequences.
//! * [`hashing`] maps token sequences into a fixed m-dimensional signed-count
//!   space that preserves the term-frequency geometry in expectation.
//! * [`sketch`] maintains an online count-min summary of per-bucket document
//!   frequencies and produces IDF-corrected embeddings without a vocabulary.
//! * [`model`] holds the nearest-prototype region classifier ("clashing")
//!   with per-region label statistics and two online learning modes.
//! * [`baselines`] provides the binary-relevance perceptron and 1-NN
//!   comparison learners.
//! * [`metrics`] accumulates per-label confusion counters and macro/micro
//!   precision, recall and F1.
//! * [`geometry`] is the exact full-vocabulary oracle used to measure how
//!   well the hashed space approximates the exact TF / TF-IDF geometry.
//! * [`corpus`] generates reproducible synthetic multi-label corpora.
//! * [`engine`] drives the prequential (test-then-train) loop and the
//!   correlation experiment, and [`snapshot`] persists and restores engine
//!   state.

pub mod baselines;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod hashing;
pub mod metrics;
pub mod model;
pub mod sketch;
pub mod snapshot;
pub mod text;

pub use error::{Error, Result};
