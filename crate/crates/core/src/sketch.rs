//! Online document-frequency summary and IDF-corrected embedding.
//!
//! A count-min sketch of `L x m` counters tracks, per hash bucket, how many
//! documents touched it. Row 0 shares the bucket hash of the embedding
//! space, so the row-0 counter of bucket `k` is exactly the per-bucket
//! document frequency the IDF correction divides by. Extra rows, when
//! configured, tighten per-word frequency estimates via the min rule.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{hash_word, seeded_hash, split_seed, HashConfig, HashedVector};
use crate::text::TokenSeq;

/// Fixed-size array of monotone counters addressed by seeded hashes.
/// The point estimate for an item is the minimum over rows of the
/// addressed counter, which can only over-count the true frequency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMinSketch {
    width: usize,
    row_seeds: Vec<u64>,
    counters: Vec<Vec<u64>>,
}

impl CountMinSketch {
    /// `index_seed` becomes row 0's hash seed; further rows use seeds
    /// derived from it.
    pub fn new(rows: usize, width: usize, index_seed: u64) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidConfig("sketch needs at least one row".into()));
        }
        if width == 0 {
            return Err(Error::InvalidConfig(
                "sketch width must be at least 1".into(),
            ));
        }
        let row_seeds = (0..rows)
            .map(|row| {
                if row == 0 {
                    index_seed
                } else {
                    split_seed(index_seed, row as u64)
                }
            })
            .collect();
        Ok(Self {
            width,
            row_seeds,
            counters: vec![vec![0; width]; rows],
        })
    }

    pub fn rows(&self) -> usize {
        self.counters.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bucket_in_row(&self, row: usize, item: &str) -> usize {
        (seeded_hash(item.as_bytes(), self.row_seeds[row]) % self.width as u64) as usize
    }

    /// Plain frequency update: add `count` to the item's counter in every
    /// row.
    pub fn add(&mut self, item: &str, count: u64) {
        for row in 0..self.rows() {
            let bucket = self.bucket_in_row(row, item);
            self.counters[row][bucket] += count;
        }
    }

    /// Min-over-rows point estimate for one item. Never under-counts.
    pub fn estimate(&self, item: &str) -> u64 {
        (0..self.rows())
            .map(|row| self.counters[row][self.bucket_in_row(row, item)])
            .min()
            .expect("sketch has at least one row")
    }

    /// Row-0 counter for a bucket of the embedding space.
    pub fn row0_count(&self, bucket: usize) -> u64 {
        self.counters[0][bucket]
    }

    pub fn counters(&self) -> &[Vec<u64>] {
        &self.counters
    }

    pub(crate) fn from_counters(
        width: usize,
        index_seed: u64,
        counters: Vec<Vec<u64>>,
    ) -> Result<Self> {
        let restored = Self::new(counters.len().max(1), width, index_seed)?;
        if counters.len() != restored.rows() || counters.iter().any(|row| row.len() != width) {
            return Err(Error::InvalidConfig(
                "sketch counter shape does not match its config".into(),
            ));
        }
        Ok(Self {
            counters,
            ..restored
        })
    }

    pub fn memory_bytes(&self) -> u64 {
        (self.rows() * self.width * std::mem::size_of::<u64>()) as u64
            + (self.row_seeds.len() * std::mem::size_of::<u64>()) as u64
    }
}

/// Count-min sketch plus the number of absorbed documents: everything the
/// online IDF correction needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdfSketch {
    cm: CountMinSketch,
    docs: u64,
}

impl IdfSketch {
    /// Width and row-0 seed come from the embedding config so that sketch
    /// buckets and embedding buckets coincide.
    pub fn new(config: &HashConfig, rows: usize) -> Result<Self> {
        Ok(Self {
            cm: CountMinSketch::new(rows, config.dim(), config.index_seed())?,
            docs: 0,
        })
    }

    pub fn docs(&self) -> u64 {
        self.docs
    }

    pub fn sketch(&self) -> &CountMinSketch {
        &self.cm
    }

    pub(crate) fn from_parts(cm: CountMinSketch, docs: u64) -> Self {
        Self { cm, docs }
    }

    /// Rebuild a sketch from serialized counters; row seeds are re-derived
    /// from the embedding config.
    pub(crate) fn restore(config: &HashConfig, counters: Vec<Vec<u64>>, docs: u64) -> Result<Self> {
        let cm = CountMinSketch::from_counters(config.dim(), config.index_seed(), counters)?;
        Ok(Self::from_parts(cm, docs))
    }

    /// Absorb one document: in every row, each bucket touched by the
    /// document gains exactly 1 (binary per-document indicator, so repeated
    /// words add once), and the document counter gains 1. Returns the row-0
    /// (= embedding-space) buckets the document touched. An empty document
    /// still counts.
    pub fn absorb_document(&mut self, tokens: &TokenSeq) -> BTreeSet<usize> {
        let distinct: BTreeSet<&str> = tokens.iter().collect();
        self.absorb_distinct(&distinct)
    }

    fn absorb_distinct(&mut self, distinct: &BTreeSet<&str>) -> BTreeSet<usize> {
        let mut touched_row0 = BTreeSet::new();
        for row in 0..self.cm.rows() {
            let mut touched: BTreeSet<usize> = BTreeSet::new();
            for word in distinct {
                touched.insert(self.cm.bucket_in_row(row, word));
            }
            for &bucket in &touched {
                self.cm.counters[row][bucket] += 1;
            }
            if row == 0 {
                touched_row0 = touched;
            }
        }
        self.docs += 1;
        touched_row0
    }

    /// `ln(docs / count)` for a touched bucket, using the bucket's own
    /// (row-0) document frequency. Zero when every absorbed document
    /// touched the bucket; querying an untouched bucket or an empty sketch
    /// is a contract violation.
    pub fn idf_of_bucket(&self, bucket: usize) -> Result<f64> {
        if self.docs == 0 {
            return Err(Error::EmptySketch);
        }
        let count = self.cm.row0_count(bucket);
        if count == 0 {
            return Err(Error::UntouchedBucket(bucket));
        }
        Ok((self.docs as f64 / count as f64).ln())
    }

    /// Per-word IDF estimate through the min-over-rows frequency estimate.
    /// Coincides with `idf_of_bucket(h(word))` at one row; with more rows
    /// the estimate can only move toward (never past) the exact IDF.
    pub fn idf_of_word(&self, word: &str) -> Result<f64> {
        if self.docs == 0 {
            return Err(Error::EmptySketch);
        }
        let count = self.cm.estimate(word);
        if count == 0 {
            return Err(Error::UntouchedBucket(self.cm.bucket_in_row(0, word)));
        }
        Ok((self.docs as f64 / count as f64).ln())
    }

    /// Estimated number of absorbed documents containing `word`.
    pub fn document_frequency(&self, word: &str) -> u64 {
        self.cm.estimate(word)
    }

    pub fn memory_bytes(&self) -> u64 {
        self.cm.memory_bytes() + std::mem::size_of::<u64>() as u64
    }
}

/// Embed the TF-IDF geometry online, in order: (1) build the signed TF
/// embedding and the set of touched buckets in one token pass, (2) absorb
/// the document into the sketch, (3) scale every touched bucket by the
/// post-update IDF of that bucket. The document therefore contributes to
/// its own IDF denominator; untouched buckets stay zero.
pub fn embed_tfidf(tokens: &TokenSeq, sketch: &mut IdfSketch, config: &HashConfig) -> HashedVector {
    debug_assert_eq!(sketch.cm.width(), config.dim());
    let mut v = HashedVector::zeros(config.dim());
    let mut distinct: BTreeSet<&str> = BTreeSet::new();
    for word in tokens.iter() {
        let (bucket, sign) = hash_word(word, config);
        v.components_mut()[bucket] += sign;
        distinct.insert(word);
    }
    let touched = sketch.absorb_distinct(&distinct);
    for &bucket in &touched {
        let weight = sketch
            .idf_of_bucket(bucket)
            .expect("bucket touched by the document just absorbed");
        v.components_mut()[bucket] *= weight;
    }
    v
}
