use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::tree::Node;
use super::{LtrError, Objective, TrainConfig};
use crate::corpus::Timestamp;
use crate::features::FeatureVector;

pub const MODEL_FORMAT: &str = "issuerank-model";
pub const MODEL_VERSION: u32 = 1;

/// Additive tree ensemble: `score(x) = learning_rate * Σ tree(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingModel {
    pub format: String,
    pub version: u32,
    pub objective: Objective,
    pub learning_rate: f64,
    pub registry_version: String,
    pub n_features: usize,
    pub hyperparameters: TrainConfig,
    pub trees: Vec<Node>,
}

impl RankingModel {
    /// A model with no trees, scoring everything 0.
    pub fn empty(registry_version: &str, n_features: usize, cfg: &TrainConfig) -> Self {
        RankingModel {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            objective: cfg.objective,
            learning_rate: cfg.learning_rate,
            registry_version: registry_version.to_string(),
            n_features,
            hyperparameters: cfg.clone(),
            trees: Vec::new(),
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.learning_rate * self.trees.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    /// Score of a vector built under the model's registry.
    pub fn predict(&self, x: &FeatureVector) -> Result<f64, LtrError> {
        self.check_registry(&x.registry_version)?;
        if x.len() != self.n_features {
            return Err(LtrError::Data(format!("vector length {} != {}", x.len(), self.n_features)));
        }
        Ok(self.score(&x.values))
    }

    pub fn check_registry(&self, live: &str) -> Result<(), LtrError> {
        if self.registry_version != live {
            return Err(LtrError::RegistryMismatch {
                model: self.registry_version.clone(),
                live: live.to_string(),
            });
        }
        Ok(())
    }

    /// First `k` trees only.
    pub fn truncated(&self, k: usize) -> RankingModel {
        let mut m = self.clone();
        m.trees.truncate(k);
        m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Parses a model and refuses it unless it was built for `live_registry`.
    pub fn from_json(text: &str, live_registry: &str) -> Result<Self, LtrError> {
        let m: RankingModel = serde_json::from_str(text).map_err(|e| LtrError::Model(e.to_string()))?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(LtrError::Model(format!("unsupported format {} v{}", m.format, m.version)));
        }
        m.check_registry(live_registry)?;
        for (i, t) in m.trees.iter().enumerate() {
            if !t.all_finite() {
                return Err(LtrError::Model(format!("tree {i} has a non-finite value")));
            }
            if t.max_feature().is_some_and(|f| f >= m.n_features) {
                return Err(LtrError::Model(format!("tree {i} uses a feature index >= {}", m.n_features)));
            }
        }
        Ok(m)
    }
}

/// 1-based rank of `pos` under descending scores, earlier positions winning ties.
pub(crate) fn positive_rank(scores: &[f64], pos: usize) -> usize {
    let sp = scores[pos];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(j, &s)| s > sp || (s == sp && j < pos))
        .count()
}

/// Indices ordered by descending score, then ascending creation time, then id.
pub fn order_by_score(scores: &[f64], keys: &[(Timestamp, &str)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| keys[a].cmp(&keys[b]))
    });
    order
}

#[derive(Debug, Clone, Copy)]
pub struct RankItem<'a> {
    pub id: &'a str,
    pub created_at: Timestamp,
    pub features: &'a FeatureVector,
}

/// Candidate ids with scores, best first.
pub fn rank(model: &RankingModel, items: &[RankItem<'_>]) -> Result<Vec<(String, f64)>, LtrError> {
    let scores = items.iter().map(|it| model.predict(it.features)).collect::<Result<Vec<_>, _>>()?;
    let keys: Vec<(Timestamp, &str)> = items.iter().map(|it| (it.created_at, it.id)).collect();
    Ok(order_by_score(&scores, &keys)
        .into_iter()
        .map(|i| (items[i].id.to_string(), scores[i]))
        .collect())
}
