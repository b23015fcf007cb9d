//! Edge classifiers: a depth-limited random forest (primary) and an
//! L2-regularized logistic regression baseline, with stratified
//! cross-validation and repeated-training reports.

mod cv;
mod forest;
mod logistic;
mod tree;

pub use cv::{
    cross_validate, kfold_scores, score_metrics, stratified_folds, stratified_split, CVReport,
    Metrics, RepeatOutcome,
};
pub use forest::{train_forest, variable_importance, OobReport, RandomForest};
pub use logistic::{train_logistic, LogisticModel};
pub use tree::TreeNode;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("training needs at least {need} rows, got {n}")]
    TooFewRows { n: usize, need: usize },
    #[error("feature schema mismatch: model {expected}, data {got}")]
    SchemaMismatch { expected: String, got: String },
    #[error("row has {got} features, model expects {expected}")]
    RowWidth { expected: usize, got: usize },
    #[error("stratification failed: {0}")]
    Stratification(String),
    #[error("optimizer did not converge: final gradient norm {gradient_norm:.3e}")]
    NonConvergence { gradient_norm: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("unsupported model document version {0}")]
    UnsupportedVersion(u32),
}

/// Number of candidate features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeaturesPerSplit {
    #[serde(rename = "sqrt")]
    Sqrt(SqrtMarker),
    Fixed(usize),
}

/// Serde helper so `"sqrt"` round-trips as a string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqrtMarker {
    #[serde(rename = "sqrt")]
    Sqrt,
}

impl FeaturesPerSplit {
    pub const SQRT: FeaturesPerSplit = FeaturesPerSplit::Sqrt(SqrtMarker::Sqrt);

    pub fn resolve(&self, n_features: usize) -> usize {
        match self {
            FeaturesPerSplit::Sqrt(_) => ((n_features as f64).sqrt().floor() as usize).max(1),
            FeaturesPerSplit::Fixed(k) => (*k).clamp(1, n_features.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub k_folds: usize,
    pub repeats: usize,
    pub rng_seed: u64,
    pub features_per_split: FeaturesPerSplit,
    pub min_leaf: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_trees: 30,
            max_depth: 5,
            k_folds: 10,
            repeats: 50,
            rng_seed: 0,
            features_per_split: FeaturesPerSplit::SQRT,
            min_leaf: 1,
        }
    }
}

impl TrainConfig {
    /// Random-vs-causal discrimination preset: 3 trees of depth 5.
    pub fn exp1() -> Self {
        TrainConfig {
            n_trees: 3,
            ..TrainConfig::default()
        }
    }

    /// Direction-of-causality preset: 30 trees of depth 5.
    pub fn exp2() -> Self {
        TrainConfig::default()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("n_trees", self.n_trees),
            ("max_depth", self.max_depth),
            ("k_folds", self.k_folds),
            ("repeats", self.repeats),
            ("min_leaf", self.min_leaf),
        ] {
            if v == 0 {
                return Err(ModelError::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

/// A trained model of either kind, as stored in `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    RandomForest(RandomForest),
    Logistic(LogisticModel),
}

const MODEL_DOC_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    version: u32,
    #[serde(flatten)]
    model: Model,
}

impl Model {
    pub fn schema_hash(&self) -> &str {
        match self {
            Model::RandomForest(f) => &f.schema_hash,
            Model::Logistic(m) => &m.schema_hash,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::RandomForest(f) => &f.feature_names,
            Model::Logistic(m) => &m.feature_names,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64, ModelError> {
        match self {
            Model::RandomForest(f) => f.predict(row),
            Model::Logistic(m) => m.predict(row),
        }
    }

    /// Causality measures for every matrix row; the matrix schema must match
    /// the schema the model was trained on.
    pub fn predict_matrix(
        &self,
        matrix: &crate::matrix::FeatureMatrix,
    ) -> Result<Vec<f64>, ModelError> {
        let got = matrix.schema_hash();
        if got != self.schema_hash() {
            return Err(ModelError::SchemaMismatch {
                expected: self.schema_hash().to_string(),
                got,
            });
        }
        matrix.rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDoc {
            version: MODEL_DOC_VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let doc: ModelDoc =
            serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        if doc.version != MODEL_DOC_VERSION {
            return Err(ModelError::UnsupportedVersion(doc.version));
        }
        Ok(doc.model)
    }
}
