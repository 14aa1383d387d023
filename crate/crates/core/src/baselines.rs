//! Comparison learners fed with the same hashed vectors as the region
//! classifier: a binary-relevance online perceptron and an all-labels
//! 1-nearest-neighbor store.

use serde::{Deserialize, Serialize};

use crate::hashing::HashedVector;
use crate::model::{LabelId, LabelSet};

pub const DEFAULT_LEARNING_RATE: f64 = 0.1;

/// One weight vector per known label; a label is predicted when its score
/// is strictly positive. No bias term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptronBr {
    dim: usize,
    learning_rate: f64,
    weights: Vec<Vec<f64>>,
}

impl PerceptronBr {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            learning_rate: DEFAULT_LEARNING_RATE,
            weights: Vec::new(),
        }
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Self {
        self.learning_rate = learning_rate;
        self
    }

    pub(crate) fn from_parts(dim: usize, learning_rate: f64, weights: Vec<Vec<f64>>) -> Self {
        Self {
            dim,
            learning_rate,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn num_labels(&self) -> usize {
        self.weights.len()
    }

    /// New labels start with a zero weight vector.
    pub fn ensure_labels(&mut self, labels: usize) {
        while self.weights.len() < labels {
            self.weights.push(vec![0.0; self.dim]);
        }
    }

    pub fn predict(&self, v: &HashedVector) -> LabelSet {
        debug_assert_eq!(v.dim(), self.dim);
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| dot(w, v.components()) > 0.0)
            .map(|(j, _)| LabelId(j as u32))
            .collect()
    }

    /// For every label on which prediction and truth disagree, move the
    /// weight vector by `rate * v` toward (false negative) or away from
    /// (false positive) the document. Agreeing labels are untouched.
    pub fn update(&mut self, v: &HashedVector, predicted: &LabelSet, truth: &LabelSet) {
        debug_assert_eq!(v.dim(), self.dim);
        for (j, w) in self.weights.iter_mut().enumerate() {
            let id = LabelId(j as u32);
            let was_predicted = predicted.contains(id);
            let is_true = truth.contains(id);
            if was_predicted == is_true {
                continue;
            }
            let direction = if is_true { 1.0 } else { -1.0 };
            let step = self.learning_rate * direction;
            for (wi, vi) in w.iter_mut().zip(v.components()) {
                *wi += step * vi;
            }
        }
    }

    pub fn memory_bytes(&self) -> u64 {
        (self.weights.len() * self.dim * std::mem::size_of::<f64>()) as u64
    }
}

fn dot(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Append-only store of every labelled document seen; predicts the label
/// set of the nearest stored vector. Memory grows with the stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Knn1Store {
    entries: Vec<(HashedVector, LabelSet)>,
}

impl Knn1Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn from_entries(entries: Vec<(HashedVector, LabelSet)>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(HashedVector, LabelSet)] {
        &self.entries
    }

    pub fn insert(&mut self, v: HashedVector, labels: LabelSet) {
        debug_assert!(!labels.is_empty());
        self.entries.push((v, labels));
    }

    /// Labels of the entry minimizing the squared distance to `v`; ties go
    /// to the earliest-inserted entry; the empty store predicts nothing.
    pub fn predict(&self, v: &HashedVector) -> LabelSet {
        let mut best: Option<(f64, &LabelSet)> = None;
        for (u, labels) in &self.entries {
            let d = v.squared_distance(u);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, labels));
            }
        }
        best.map(|(_, labels)| labels.clone()).unwrap_or_default()
    }

    pub fn memory_bytes(&self) -> u64 {
        self.entries
            .iter()
            .map(|(v, labels)| {
                (v.dim() * std::mem::size_of::<f64>() + labels.len() * std::mem::size_of::<u32>())
                    as u64
            })
            .sum()
    }
}
