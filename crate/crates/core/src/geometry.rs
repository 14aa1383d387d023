//! Exact full-vocabulary TF / TF-IDF vectors and the Gram-matrix
//! correlation experiment.
//!
//! This module is the batch oracle: it sees the whole corpus, builds a real
//! vocabulary with exact document frequencies, and produces sparse exact
//! vectors. The correlation driver samples document pairs and reports the
//! Pearson correlation between exact inner products and inner products in
//! the hashed space, which is how the fidelity of the online embedding is
//! measured.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{embed_tf, HashConfig, HashedVector};
use crate::sketch::{embed_tfidf, IdfSketch};
use crate::text::TokenSeq;

/// Weighting applied by the exact vectorizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Tf,
    Tfidf,
}

/// Word-to-index mapping with exact per-word document frequencies over a
/// closed corpus.
#[derive(Debug, Clone, Default)]
pub struct VocabIndex {
    index: HashMap<String, usize>,
    doc_freq: Vec<u64>,
    docs: u64,
}

impl VocabIndex {
    pub fn build(corpus: &[TokenSeq]) -> Self {
        let mut vocab = Self::default();
        for doc in corpus {
            let mut seen = std::collections::BTreeSet::new();
            for word in doc.iter() {
                let next = vocab.index.len();
                let id = *vocab.index.entry(word.to_string()).or_insert(next);
                if id == vocab.doc_freq.len() {
                    vocab.doc_freq.push(0);
                }
                seen.insert(id);
            }
            for id in seen {
                vocab.doc_freq[id] += 1;
            }
            vocab.docs += 1;
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn docs(&self) -> u64 {
        self.docs
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn doc_frequency(&self, word: &str) -> Option<u64> {
        self.index_of(word).map(|id| self.doc_freq[id])
    }

    /// Exact `ln(n / df)` for an indexed word.
    pub fn idf(&self, word: &str) -> Option<f64> {
        self.doc_frequency(word)
            .map(|df| (self.docs as f64 / df as f64).ln())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    /// Sum of all document frequencies: the mass term of the sketch
    /// over-count bound.
    pub fn total_doc_frequency(&self) -> u64 {
        self.doc_freq.iter().sum()
    }
}

/// Sparse exact vector; no explicit zeros are stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactVector {
    weights: BTreeMap<usize, f64>,
}

impl ExactVector {
    pub fn from_weights(weights: BTreeMap<usize, f64>) -> Self {
        Self { weights }
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.weights.get(&index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().map(|(&i, &w)| (i, w))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        // Merge over the two sorted index sets.
        let mut total = 0.0;
        let mut a = self.weights.iter();
        let mut b = other.weights.iter();
        let (mut na, mut nb) = (a.next(), b.next());
        while let (Some((ia, wa)), Some((ib, wb))) = (na, nb) {
            match ia.cmp(ib) {
                std::cmp::Ordering::Less => na = a.next(),
                std::cmp::Ordering::Greater => nb = b.next(),
                std::cmp::Ordering::Equal => {
                    total += wa * wb;
                    na = a.next();
                    nb = b.next();
                }
            }
        }
        total
    }

    pub fn squared_norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum()
    }

    pub fn squared_distance(&self, other: &Self) -> f64 {
        self.squared_norm() + other.squared_norm() - 2.0 * self.dot(other)
    }

    pub fn scale(&mut self, factor: f64) {
        for w in self.weights.values_mut() {
            *w *= factor;
        }
    }

    /// Unit-norm copy; the zero vector is returned unchanged.
    pub fn l2_normalized(&self) -> Self {
        let norm = self.squared_norm().sqrt();
        let mut out = self.clone();
        if norm > 0.0 {
            out.scale(1.0 / norm);
        }
        out
    }
}

/// Exact vectorizer. TF is raw counts (no length normalization, mirroring
/// the unnormalized hashed path so the two compare like for like); TF-IDF
/// multiplies each count by the corpus-wide `ln(n / df)`. Tokens outside
/// the vocabulary are a contract violation: oracle corpora are closed.
pub fn exact_vectorize(
    tokens: &TokenSeq,
    vocab: &VocabIndex,
    scheme: WeightScheme,
) -> Result<ExactVector> {
    let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
    for word in tokens.iter() {
        let id = vocab
            .index_of(word)
            .ok_or_else(|| Error::UnknownToken(word.to_string()))?;
        *weights.entry(id).or_insert(0.0) += 1.0;
    }
    if scheme == WeightScheme::Tfidf {
        for (&id, weight) in weights.iter_mut() {
            let df = vocab.doc_freq[id];
            *weight *= (vocab.docs as f64 / df as f64).ln();
        }
    }
    Ok(ExactVector { weights })
}

/// One side of a sampled Gram comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramSide {
    /// Exact TF vectors from the full vocabulary.
    #[serde(rename = "tf")]
    ExactTf,
    /// Exact TF-IDF vectors with corpus-wide IDF.
    #[serde(rename = "tfidf")]
    ExactTfidf,
    /// Hashed TF embeddings.
    #[serde(rename = "htf")]
    HashedTf,
    /// Hashed embeddings with the online IDF correction, replaying the
    /// corpus in order through a fresh sketch.
    #[serde(rename = "htfidf")]
    HashedTfidf,
}

impl GramSide {
    pub fn code(self) -> &'static str {
        match self {
            Self::ExactTf => "tf",
            Self::ExactTfidf => "tfidf",
            Self::HashedTf => "htf",
            Self::HashedTfidf => "htfidf",
        }
    }
}

impl std::str::FromStr for GramSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tf" => Ok(Self::ExactTf),
            "tfidf" => Ok(Self::ExactTfidf),
            "htf" => Ok(Self::HashedTf),
            "htfidf" => Ok(Self::HashedTfidf),
            other => Err(Error::InvalidConfig(format!(
                "unknown representation {other:?} (expected tf, tfidf, htf or htfidf)"
            ))),
        }
    }
}

/// Parameters of one correlation measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramParams {
    pub dim: usize,
    pub pairs: usize,
    pub sample_seed: u64,
    pub index_seed: u64,
    pub sign_seed: u64,
}

fn sparsify(v: &HashedVector) -> ExactVector {
    let weights = v
        .components()
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(i, &x)| (i, x))
        .collect();
    ExactVector { weights }
}

fn side_vectors(
    corpus: &[TokenSeq],
    side: GramSide,
    params: &GramParams,
) -> Result<Vec<ExactVector>> {
    match side {
        GramSide::ExactTf | GramSide::ExactTfidf => {
            let vocab = VocabIndex::build(corpus);
            let scheme = if side == GramSide::ExactTf {
                WeightScheme::Tf
            } else {
                WeightScheme::Tfidf
            };
            corpus
                .iter()
                .map(|doc| exact_vectorize(doc, &vocab, scheme))
                .collect()
        }
        GramSide::HashedTf => {
            let config = HashConfig::new(params.dim, params.index_seed, params.sign_seed)?;
            Ok(corpus
                .iter()
                .map(|doc| sparsify(&embed_tf(doc, &config)))
                .collect())
        }
        GramSide::HashedTfidf => {
            let config = HashConfig::new(params.dim, params.index_seed, params.sign_seed)?;
            let mut sketch = IdfSketch::new(&config, 1)?;
            Ok(corpus
                .iter()
                .map(|doc| sparsify(&embed_tfidf(doc, &mut sketch, &config)))
                .collect())
        }
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut cov, mut var_x, mut var_y) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::DegenerateSample(
            "inner products have zero variance".into(),
        ));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Sample `pairs` distinct-document pairs with the given seed, compute the
/// inner products of each pair under both representations, and return the
/// Pearson correlation between the two samples.
pub fn gram_correlation(
    corpus: &[TokenSeq],
    side_a: GramSide,
    side_b: GramSide,
    params: &GramParams,
) -> Result<f64> {
    if corpus.len() < 2 {
        return Err(Error::InvalidConfig(
            "correlation needs at least two documents".into(),
        ));
    }
    if params.pairs < 2 {
        return Err(Error::InvalidConfig(
            "correlation needs at least two sampled pairs".into(),
        ));
    }
    let reps_a = side_vectors(corpus, side_a, params)?;
    let reps_b = if side_b == side_a {
        reps_a.clone()
    } else {
        side_vectors(corpus, side_b, params)?
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.sample_seed);
    let mut dots_a = Vec::with_capacity(params.pairs);
    let mut dots_b = Vec::with_capacity(params.pairs);
    for _ in 0..params.pairs {
        let i = rng.gen_range(0..corpus.len());
        let mut j = rng.gen_range(0..corpus.len());
        while j == i {
            j = rng.gen_range(0..corpus.len());
        }
        dots_a.push(reps_a[i].dot(&reps_a[j]));
        dots_b.push(reps_b[i].dot(&reps_b[j]));
    }
    pearson(&dots_a, &dots_b)
}
