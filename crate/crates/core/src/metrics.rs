//! Cumulative multi-label evaluation: per-label confusion counters updated
//! every round, summarized into macro/micro precision, recall, F1 and
//! accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabelId, LabelSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionCounts {
    fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    fn precision(&self) -> f64 {
        ratio(self.true_pos, self.true_pos + self.false_pos)
    }

    fn recall(&self) -> f64 {
        ratio(self.true_pos, self.true_pos + self.false_neg)
    }

    fn f1(&self) -> f64 {
        ratio(
            2 * self.true_pos,
            2 * self.true_pos + self.false_pos + self.false_neg,
        )
    }
}

/// Zero-denominator convention: undefined scores are 0, the pessimistic
/// standard when macro-averaging over rare labels.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-label tallies plus the number of evaluated documents. For every
/// label, `tp + fp + fn + tn == rounds`: labels discovered later are
/// backfilled with true negatives for the rounds before they appeared.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounters {
    counts: Vec<ConfusionCounts>,
    rounds: u64,
}

impl LabelCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn num_labels(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self, label: LabelId) -> Option<&ConfusionCounts> {
        self.counts.get(label.index())
    }

    /// Grow to `labels` entries; new labels enter with `tn` equal to the
    /// rounds already evaluated.
    pub fn ensure_labels(&mut self, labels: usize) {
        while self.counts.len() < labels {
            self.counts.push(ConfusionCounts {
                true_neg: self.rounds,
                ..ConfusionCounts::default()
            });
        }
    }

    /// Record one document's outcome; call before any learning update for
    /// the round so the prediction is scored against the pre-update model.
    pub fn record(&mut self, predicted: &LabelSet, truth: &LabelSet) {
        for (j, counts) in self.counts.iter_mut().enumerate() {
            let id = LabelId(j as u32);
            match (predicted.contains(id), truth.contains(id)) {
                (true, true) => counts.true_pos += 1,
                (true, false) => counts.false_pos += 1,
                (false, true) => counts.false_neg += 1,
                (false, false) => counts.true_neg += 1,
            }
        }
        self.rounds += 1;
    }

    pub fn summarize(&self) -> Result<Summary> {
        if self.rounds == 0 {
            return Err(Error::NoRounds);
        }
        let labels = self.counts.len() as f64;
        let (mut macro_p, mut macro_r, mut macro_f1) = (0.0, 0.0, 0.0);
        let mut pooled = ConfusionCounts::default();
        for counts in &self.counts {
            macro_p += counts.precision();
            macro_r += counts.recall();
            macro_f1 += counts.f1();
            pooled.true_pos += counts.true_pos;
            pooled.false_pos += counts.false_pos;
            pooled.false_neg += counts.false_neg;
            pooled.true_neg += counts.true_neg;
        }
        if labels > 0.0 {
            macro_p /= labels;
            macro_r /= labels;
            macro_f1 /= labels;
        }
        Ok(Summary {
            macro_p,
            macro_r,
            macro_f1,
            micro_p: pooled.precision(),
            micro_r: pooled.recall(),
            micro_f1: pooled.f1(),
            accuracy: ratio(pooled.true_pos + pooled.true_neg, pooled.total()),
        })
    }
}

/// Macro scores average per-label values; micro scores pool the confusion
/// counts first; accuracy is the pooled per-label binary accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub macro_p: f64,
    pub macro_r: f64,
    pub macro_f1: f64,
    pub micro_p: f64,
    pub micro_r: f64,
    pub micro_f1: f64,
    pub accuracy: f64,
}
