//! The region classifier: one prototype per label, a nearest-prototype
//! mapper, a threshold prediction rule over per-region label statistics,
//! and two online learning modes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::HashedVector;

/// Dense label identifier, assigned in order of first appearance in the
/// stream: if id `k` exists, ids `0..k` exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u32);

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of label identifiers; both ground truth and predictions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSet(BTreeSet<LabelId>);

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: LabelId) -> bool {
        self.0.insert(id)
    }

    pub fn contains(&self, id: LabelId) -> bool {
        self.0.contains(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.0.iter().copied()
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &Self) -> Self {
        Self(self.0.difference(&other.0).copied().collect())
    }
}

impl FromIterator<LabelId> for LabelSet {
    fn from_iter<T: IntoIterator<Item = LabelId>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[u32; N]> for LabelSet {
    fn from(ids: [u32; N]) -> Self {
        ids.into_iter().map(LabelId).collect()
    }
}

/// One region of the partition: its prototype vector, the number of
/// documents that contributed to it, and one label-frequency statistic per
/// known label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    prototype: HashedVector,
    count: u64,
    stats: Vec<f64>,
}

impl Region {
    fn new(dim: usize, labels: usize) -> Self {
        Self {
            prototype: HashedVector::zeros(dim),
            count: 0,
            stats: vec![0.0; labels],
        }
    }

    pub(crate) fn from_parts(prototype: HashedVector, count: u64, stats: Vec<f64>) -> Self {
        Self {
            prototype,
            count,
            stats,
        }
    }

    pub fn prototype(&self) -> &HashedVector {
        &self.prototype
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn stats(&self) -> &[f64] {
        &self.stats
    }

    /// A region participates in mapping once it has absorbed a document.
    pub fn is_trained(&self) -> bool {
        self.count >= 1
    }

    /// Recursive label-frequency update: for every known label `j`,
    /// `stat_j <- (1 - rate) * stat_j + rate` when `j` is in `truth`, else
    /// `stat_j <- (1 - rate) * stat_j`. With `rate = 1/count` this tracks
    /// the exact co-occurrence ratio.
    pub fn update_label_stats(&mut self, truth: &LabelSet, rate: f64) {
        debug_assert!(rate > 0.0 && rate <= 1.0);
        for (j, stat) in self.stats.iter_mut().enumerate() {
            *stat *= 1.0 - rate;
            if truth.contains(LabelId(j as u32)) {
                *stat += rate;
            }
        }
    }

    /// One per-label learning step: bump the count, fold the document into
    /// the running-mean prototype, refresh the label statistics.
    fn absorb(&mut self, v: &HashedVector, truth: &LabelSet) {
        self.count += 1;
        let rate = 1.0 / self.count as f64;
        self.prototype.blend(rate, v);
        self.update_label_stats(truth, rate);
    }
}

/// How prototypes are updated from labelled documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningMode {
    /// Every document updates the region of every label it carries.
    Mode1,
    /// Mistake-driven: false-negative labels are updated, and any false
    /// positive triggers a full Mode-1 pass.
    Mode2,
}

/// Score used by the mapper. The canonical choice is the negated squared
/// distance of the Voronoi rule; a raw dot-product similarity is available
/// but not the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Similarity {
    #[default]
    NegSquaredDistance,
    Dot,
}

/// The full classifier: one region per known label, the prediction
/// threshold, and the learning mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClasherModel {
    dim: usize,
    theta: f64,
    mode: LearningMode,
    similarity: Similarity,
    dedupe: bool,
    regions: Vec<Region>,
}

impl ClasherModel {
    pub fn new(dim: usize, theta: f64, mode: LearningMode) -> Self {
        Self {
            dim,
            theta,
            mode,
            similarity: Similarity::default(),
            dedupe: false,
            regions: Vec::new(),
        }
    }

    pub fn with_similarity(mut self, similarity: Similarity) -> Self {
        self.similarity = similarity;
        self
    }

    /// Suppress the second update of false-negative labels when a false
    /// positive also triggers the full Mode-1 pass. Off by default: the
    /// double update is the literal Mode-2 behavior.
    pub fn with_dedupe(mut self, dedupe: bool) -> Self {
        self.dedupe = dedupe;
        self
    }

    pub(crate) fn from_parts(
        dim: usize,
        theta: f64,
        mode: LearningMode,
        similarity: Similarity,
        dedupe: bool,
        regions: Vec<Region>,
    ) -> Self {
        Self {
            dim,
            theta,
            mode,
            similarity,
            dedupe,
            regions,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mode(&self) -> LearningMode {
        self.mode
    }

    pub fn similarity(&self) -> Similarity {
        self.similarity
    }

    pub fn dedupe(&self) -> bool {
        self.dedupe
    }

    pub fn num_labels(&self) -> usize {
        self.regions.len()
    }

    pub fn region(&self, index: usize) -> Option<&Region> {
        self.regions.get(index)
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Grow to `labels` regions. New regions start untrained with a zero
    /// prototype, and every existing region's statistics array gains zeros
    /// for the new labels.
    pub fn ensure_labels(&mut self, labels: usize) {
        for region in &mut self.regions {
            if region.stats.len() < labels {
                region.stats.resize(labels, 0.0);
            }
        }
        while self.regions.len() < labels {
            self.regions.push(Region::new(self.dim, labels));
        }
    }

    /// Nearest trained prototype for `v`, ties broken by lowest region
    /// index; `None` when no region is trained yet.
    pub fn map_region(&self, v: &HashedVector) -> Result<Option<usize>> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        let mut best: Option<(usize, f64)> = None;
        for (index, region) in self.regions.iter().enumerate() {
            if !region.is_trained() {
                continue;
            }
            let score = match self.similarity {
                Similarity::NegSquaredDistance => -v.squared_distance(region.prototype()),
                Similarity::Dot => v.dot(region.prototype()),
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((index, score));
            }
        }
        Ok(best.map(|(index, _)| index))
    }

    /// Labels whose statistic in the mapped region strictly exceeds the
    /// threshold; the empty set when nothing is mapped.
    pub fn predict_labels(&self, region: Option<usize>) -> LabelSet {
        match region {
            None => LabelSet::new(),
            Some(index) => self.regions[index]
                .stats
                .iter()
                .enumerate()
                .filter(|(_, &stat)| stat > self.theta)
                .map(|(j, _)| LabelId(j as u32))
                .collect(),
        }
    }

    /// Map then threshold.
    pub fn predict(&self, v: &HashedVector) -> Result<LabelSet> {
        Ok(self.predict_labels(self.map_region(v)?))
    }

    /// Mode 1: each label the document carries absorbs it into that label's
    /// region. Regions of absent labels are untouched.
    pub fn learn_mode1(&mut self, v: &HashedVector, truth: &LabelSet) {
        debug_assert!(!truth.is_empty());
        for id in truth.iter() {
            self.regions[id.index()].absorb(v, truth);
        }
    }

    /// Mode 2: false-negative labels absorb the document; then, if any
    /// label was falsely predicted, the full Mode-1 pass runs as well,
    /// which updates the false-negative labels a second time unless dedupe
    /// is on.
    pub fn learn_mode2(&mut self, v: &HashedVector, predicted: &LabelSet, truth: &LabelSet) {
        let false_negatives = truth.difference(predicted);
        let false_positives = predicted.difference(truth);
        for id in false_negatives.iter() {
            self.regions[id.index()].absorb(v, truth);
        }
        if !false_positives.is_empty() {
            for id in truth.iter() {
                if self.dedupe && false_negatives.contains(id) {
                    continue;
                }
                self.regions[id.index()].absorb(v, truth);
            }
        }
    }

    /// Dispatch on the configured mode.
    pub fn learn(&mut self, v: &HashedVector, predicted: &LabelSet, truth: &LabelSet) {
        match self.mode {
            LearningMode::Mode1 => self.learn_mode1(v, truth),
            LearningMode::Mode2 => self.learn_mode2(v, predicted, truth),
        }
    }

    pub fn memory_bytes(&self) -> u64 {
        let per_region = |r: &Region| {
            (r.prototype.dim() + r.stats.len()) * std::mem::size_of::<f64>()
                + std::mem::size_of::<u64>()
        };
        self.regions.iter().map(|r| per_region(r) as u64).sum()
    }
}
