//! Versioned model snapshot: everything needed to restore an engine whose
//! subsequent predictions are bit-identical to the original.

use serde::{Deserialize, Serialize};

use crate::baselines::{Knn1Store, PerceptronBr};
use crate::engine::{Learner, LearnerKind, StreamConfig};
use crate::error::{Error, Result};
use crate::hashing::HashedVector;
use crate::model::{ClasherModel, LabelId, LabelSet, LearningMode, Region, Similarity};

pub const MODEL_FORMAT: &str = "clasher-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub format: String,
    pub version: u32,
    pub config: StreamConfig,
    /// Resolved stop-word list (sorted), so restoring does not depend on
    /// the original file still existing unchanged.
    pub stopwords: Vec<String>,
    /// Label dictionary in id order.
    pub labels: Vec<String>,
    /// Rounds processed so far; the labelling coin continues from here.
    pub rounds: u64,
    pub sketch: Option<SketchState>,
    pub learner: LearnerState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchState {
    pub docs: u64,
    pub counters: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionState {
    pub count: u64,
    pub prototype: Vec<f64>,
    pub stats: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnEntry {
    pub vector: Vec<f64>,
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnerState {
    Clasher {
        similarity: Similarity,
        regions: Vec<RegionState>,
    },
    Perceptron {
        learning_rate: f64,
        weights: Vec<Vec<f64>>,
    },
    Knn {
        entries: Vec<KnnEntry>,
    },
}

impl LearnerState {
    pub fn from_learner(learner: &Learner) -> Self {
        match learner {
            Learner::Clasher(model) => Self::Clasher {
                similarity: model.similarity(),
                regions: model
                    .regions()
                    .iter()
                    .map(|region| RegionState {
                        count: region.count(),
                        prototype: region.prototype().components().to_vec(),
                        stats: region.stats().to_vec(),
                    })
                    .collect(),
            },
            Learner::Perceptron(model) => Self::Perceptron {
                learning_rate: model.learning_rate(),
                weights: model.weights().to_vec(),
            },
            Learner::Knn(store) => Self::Knn {
                entries: store
                    .entries()
                    .iter()
                    .map(|(v, labels)| KnnEntry {
                        vector: v.components().to_vec(),
                        labels: labels.iter().map(|id| id.0).collect(),
                    })
                    .collect(),
            },
        }
    }

    pub fn into_learner(self, config: &StreamConfig) -> Result<Learner> {
        match (self, config.learner) {
            (
                Self::Clasher {
                    similarity,
                    regions,
                },
                LearnerKind::Mode1 | LearnerKind::Mode2,
            ) => {
                let mode = if config.learner == LearnerKind::Mode1 {
                    LearningMode::Mode1
                } else {
                    LearningMode::Mode2
                };
                let regions = regions
                    .into_iter()
                    .map(|state| {
                        Region::from_parts(
                            HashedVector::from_components(state.prototype),
                            state.count,
                            state.stats,
                        )
                    })
                    .collect();
                Ok(Learner::Clasher(ClasherModel::from_parts(
                    config.dim,
                    config.theta,
                    mode,
                    similarity,
                    config.dedupe,
                    regions,
                )))
            }
            (
                Self::Perceptron {
                    learning_rate,
                    weights,
                },
                LearnerKind::Perceptron,
            ) => Ok(Learner::Perceptron(PerceptronBr::from_parts(
                config.dim,
                learning_rate,
                weights,
            ))),
            (Self::Knn { entries }, LearnerKind::Knn1) => {
                let entries = entries
                    .into_iter()
                    .map(|entry| {
                        (
                            HashedVector::from_components(entry.vector),
                            entry.labels.into_iter().map(LabelId).collect::<LabelSet>(),
                        )
                    })
                    .collect();
                Ok(Learner::Knn(Knn1Store::from_entries(entries)))
            }
            _ => Err(Error::InvalidConfig(
                "snapshot learner state does not match the configured learner".into(),
            )),
        }
    }
}
