//! Discrimination, calibration, thresholding, and clustering-agreement
//! metrics, plus experiment-level report assembly.

mod ari;
mod metrics;
mod pam;
mod report;

pub use ari::adjusted_rand_index;
pub use metrics::{
    hl_chi_square_from_groups, hosmer_lemeshow, roc_auc, youden_threshold, HlGroup, HlResult,
    RocPoint,
};
pub use pam::{pam_cluster, PamResult};
pub use report::{
    assemble_report, ClassQuartiles, ClusteringOutcome, ClusteringReport, EvaluationReport,
    write_calibration_csv, write_clusters_csv, write_roc_csv, write_score_dist_csv,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("metric needs both classes present")]
    OneClassOnly,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Validated score/label pairs for metric computation.
#[derive(Debug, Clone)]
pub struct ScoredSet {
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self, EvalError> {
        if scores.len() != labels.len() {
            return Err(EvalError::LengthMismatch(scores.len(), labels.len()));
        }
        Ok(ScoredSet { scores, labels })
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}
