//! Learning to rank: LambdaMART, a pointwise logistic GBT baseline, and
//! the Random / GFIRandom baselines.
//!
//! Training data is a set of lists, each holding the feature vectors of its
//! candidates in tie order (creation time, then id) and the index of the one
//! positive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;

mod baselines;
mod boost;
mod model;
pub mod tree;

pub use baselines::{baseline_gfirandom, baseline_random};
pub use boost::{delta_ndcg_single_positive, lambda_pair, pairwise_loss, train, train_lambdamart, train_pointwise_gbt};
pub use model::{order_by_score, rank, RankItem, RankingModel, MODEL_FORMAT, MODEL_VERSION};
pub use tree::Node;

#[derive(Debug, Error)]
pub enum LtrError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("no usable training lists")]
    EmptyTraining,
    #[error("inconsistent training data: {0}")]
    Data(String),
    #[error("registry mismatch: model built for {model}, live registry is {live}")]
    RegistryMismatch { model: String, live: String },
    #[error("malformed model: {0}")]
    Model(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Lambdarank,
    PointwiseLogloss,
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lambdarank" => Ok(Objective::Lambdarank),
            "pointwise_logloss" | "pointwise" => Ok(Objective::PointwiseLogloss),
            _ => Err(format!("unknown objective {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    pub learning_rate: f64,
    pub sigma: f64,
    /// 0 disables early stopping.
    pub early_stopping_rounds: usize,
    pub seed: u64,
    pub objective: Objective,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_trees: 300,
            max_leaves: 31,
            min_samples_leaf: 20,
            learning_rate: 0.1,
            sigma: 1.0,
            early_stopping_rounds: 30,
            seed: 0,
            objective: Objective::Lambdarank,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LtrError> {
        if self.n_trees < 1 {
            return Err(LtrError::Config("n_trees must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(LtrError::Config(format!("learning_rate {} outside (0, 1]", self.learning_rate)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(LtrError::Config(format!("sigma {} must be positive", self.sigma)));
        }
        if self.max_leaves < 2 {
            return Err(LtrError::Config("max_leaves must be at least 2".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(LtrError::Config("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

/// Candidate vectors of one list, in tie order, with the positive's index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledList {
    pub features: Vec<FeatureVector>,
    pub positive: usize,
}

impl LabeledList {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}
