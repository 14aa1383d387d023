//! Hashed embedding of token sequences into a fixed m-dimensional space.
//!
//! Each word is routed to a bucket by a seeded 64-bit hash and contributes a
//! Rademacher sign drawn from an independently seeded hash, so inner products
//! in the hashed space are unbiased estimates of inner products in the full
//! word-count space. The hash is fixed (seeded FNV-1a with a 64-bit avalanche
//! finalizer) so that equal seeds give equal embeddings across runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TokenSeq;

/// Seeded 64-bit string hash: FNV-1a over the bytes with the seed folded
/// into the offset basis, then a murmur-style avalanche finalizer. FNV alone
/// clusters on short keys; the finalizer fixes the low bits used for bucket
/// selection.
pub(crate) fn seeded_hash(bytes: &[u8], seed: u64) -> u64 {
    let mut h = seed ^ 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

/// Derive an independent sub-seed from `seed` for stream `stream`
/// (splitmix64 step).
pub(crate) fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Default companion sign seed for a given bucket seed. Guaranteed distinct
/// from the input for any input.
pub fn companion_sign_seed(index_seed: u64) -> u64 {
    let derived = split_seed(index_seed, 0x5349_474e);
    if derived == index_seed {
        derived ^ 1
    } else {
        derived
    }
}

/// Embedding-space parameters: the dimension `m` and the two hash seeds.
/// Every vector produced under one config lives in the same space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashConfig {
    m: usize,
    index_seed: u64,
    sign_seed: u64,
}

impl HashConfig {
    pub fn new(m: usize, index_seed: u64, sign_seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig(
                "embedding dimension must be at least 1".into(),
            ));
        }
        if index_seed == sign_seed {
            return Err(Error::InvalidConfig(
                "index seed and sign seed must differ".into(),
            ));
        }
        Ok(Self {
            m,
            index_seed,
            sign_seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn index_seed(&self) -> u64 {
        self.index_seed
    }

    pub fn sign_seed(&self) -> u64 {
        self.sign_seed
    }
}

/// Bucket index in `[0, m)` and sign in `{+1, -1}` for one word.
/// Deterministic given `(word, config)`.
pub fn hash_word(word: &str, config: &HashConfig) -> (usize, f64) {
    let bucket = (seeded_hash(word.as_bytes(), config.index_seed) % config.m as u64) as usize;
    let sign = if seeded_hash(word.as_bytes(), config.sign_seed) & 1 == 0 {
        1.0
    } else {
        -1.0
    };
    (bucket, sign)
}

/// Dense m-dimensional real vector: the image of a document under the
/// hashing map. Fresh embeddings hold integer-valued signed counts until
/// IDF weighting or normalization is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashedVector {
    components: Vec<f64>,
}

impl HashedVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            components: vec![0.0; dim],
        }
    }

    pub fn from_components(components: Vec<f64>) -> Self {
        Self { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn squared_distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                let d = a - b;
                d * d
            })
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.components {
            *c *= factor;
        }
    }

    /// Recursive mean step: `self = (1 - rate) * self + rate * v`.
    pub fn blend(&mut self, rate: f64, v: &Self) {
        debug_assert_eq!(self.dim(), v.dim());
        for (c, x) in self.components.iter_mut().zip(&v.components) {
            *c = (1.0 - rate) * *c + rate * x;
        }
    }

    pub(crate) fn components_mut(&mut self) -> &mut [f64] {
        &mut self.components
    }
}

impl std::ops::Add for &HashedVector {
    type Output = HashedVector;

    fn add(self, other: &HashedVector) -> HashedVector {
        debug_assert_eq!(self.dim(), other.dim());
        HashedVector {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Optional post-embedding normalization. The embedding itself emits raw
/// signed counts; both normalized behaviors stay reachable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    L2,
    L1ByTokenCount,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "l2" => Ok(Self::L2),
            "l1-by-token-count" => Ok(Self::L1ByTokenCount),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization {other:?} (expected none, l2 or l1-by-token-count)"
            ))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::L2 => "l2",
            Self::L1ByTokenCount => "l1-by-token-count",
        })
    }
}

/// Embed the term-frequency geometry: one pass over the tokens, each word
/// adding its sign to its bucket. An empty sequence embeds to the zero
/// vector. No per-document normalization is applied here.
pub fn embed_tf(tokens: &TokenSeq, config: &HashConfig) -> HashedVector {
    let mut v = HashedVector::zeros(config.dim());
    for word in tokens.iter() {
        let (bucket, sign) = hash_word(word, config);
        v.components[bucket] += sign;
    }
    v
}

/// Apply the configured normalization in place. `token_count` is the length
/// of the token sequence the vector was embedded from.
pub fn apply_normalization(v: &mut HashedVector, mode: Normalization, token_count: usize) {
    match mode {
        Normalization::None => {}
        Normalization::L2 => {
            let norm = v.l2_norm();
            if norm > 0.0 {
                v.scale(1.0 / norm);
            }
        }
        Normalization::L1ByTokenCount => {
            if token_count > 0 {
                v.scale(1.0 / token_count as f64);
            }
        }
    }
}
