//! Stratified splits, k-fold cross-validation, and repeated training.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::train_forest;
use super::{ModelError, TrainConfig};
use crate::eval::roc_auc;
use crate::matrix::FeatureMatrix;
use crate::rng::{self, stream, StreamKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auc: f64,
    pub mse: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    /// Pooled fold-held-out predictions over the whole sample.
    pub heldout: Metrics,
    /// Out-of-bag estimate from a forest trained on the whole sample.
    pub oob: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub per_repeat: Vec<RepeatOutcome>,
    pub heldout_mean: Metrics,
    pub heldout_sd: Metrics,
    pub oob_mean: Option<Metrics>,
    pub oob_sd: Option<Metrics>,
}

/// Score/label agreement metrics. `R^2` is reported against the population
/// variance of the 0/1 labels, matching regression-style reporting of a
/// classifier's squared error.
pub fn score_metrics(scores: &[f64], y: &[u8]) -> Result<Metrics, ModelError> {
    let n = scores.len();
    if n == 0 || n != y.len() {
        return Err(ModelError::InvalidConfig(
            "scores and labels must be equal-length and non-empty".into(),
        ));
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == n {
        return Err(ModelError::SingleClass);
    }
    let (auc, _) = roc_auc(scores, y).map_err(|e| ModelError::InvalidConfig(e.to_string()))?;
    let mse = scores
        .iter()
        .zip(y)
        .map(|(&s, &l)| (l as f64 - s).powi(2))
        .sum::<f64>()
        / n as f64;
    let p = pos as f64 / n as f64;
    let var = p * (1.0 - p);
    Ok(Metrics {
        auc,
        mse,
        r2: 1.0 - mse / var,
    })
}

/// Deal each class round-robin into k folds (continuing across classes), so
/// fold sizes differ by at most one overall and per class.
pub fn stratified_folds(y: &[u8], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        rng::shuffle(&mut members, rng);
        for i in members {
            folds[cursor % k].push(i);
            cursor += 1;
        }
    }
    folds
}

/// Per-class split at the given train ratio.
pub fn stratified_split(
    y: &[u8],
    train_ratio: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        rng::shuffle(&mut members, rng);
        let n_train = (members.len() as f64 * train_ratio).floor() as usize;
        train.extend(&members[..n_train]);
        test.extend(&members[n_train..]);
    }
    (train, test)
}

/// Pooled fold-held-out scores of one cross-validation repeat: every row is
/// predicted by the forest trained on the other folds.
pub fn kfold_scores(
    matrix: &FeatureMatrix,
    y: &[u8],
    cfg: &TrainConfig,
    repeat: u64,
) -> Result<Vec<f64>, ModelError> {
    cfg.validate()?;
    let n = matrix.n_rows();
    if cfg.k_folds > n / 2 {
        return Err(ModelError::InvalidConfig(format!(
            "k_folds={} exceeds n/2={}",
            cfg.k_folds,
            n / 2
        )));
    }
    let mut fold_rng = stream(cfg.rng_seed, StreamKind::FoldShuffle, repeat);
    let folds = stratified_folds(y, cfg.k_folds, &mut fold_rng);

    for (f, fold) in folds.iter().enumerate() {
        let holdout_pos = fold.iter().filter(|&&i| y[i] == 1).count();
        let train_pos = y.iter().filter(|&&v| v == 1).count() - holdout_pos;
        let train_n = n - fold.len();
        if train_pos == 0 || train_pos == train_n {
            return Err(ModelError::Stratification(format!(
                "fold {f} leaves a single-class training set"
            )));
        }
    }

    let mut scores = vec![0.0f64; n];
    for (f, fold) in folds.iter().enumerate() {
        let mut in_fold = vec![false; n];
        for &i in fold {
            in_fold[i] = true;
        }
        let train_idx: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
        let train_m = matrix.select(&train_idx);
        let train_y: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
        let fold_cfg = cfg.clone().with_seed(rng::derive_seed(
            cfg.rng_seed,
            StreamKind::Repeat,
            repeat * cfg.k_folds as u64 + f as u64,
        ));
        let (forest, _) = train_forest(&train_m, &train_y, &fold_cfg)?;
        for &i in fold {
            scores[i] = forest.predict(&matrix.rows[i])?;
        }
    }
    Ok(scores)
}

/// Repeated, reshuffled k-fold cross-validation.
///
/// Each repeat pools the fold-held-out predictions of the whole sample into
/// one metric set, and separately reports the OOB estimate of a forest
/// trained on all rows.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    y: &[u8],
    cfg: &TrainConfig,
) -> Result<CVReport, ModelError> {
    let mut per_repeat = Vec::with_capacity(cfg.repeats);
    for repeat in 0..cfg.repeats {
        let scores = kfold_scores(matrix, y, cfg, repeat as u64)?;
        let heldout = score_metrics(&scores, y)?;

        let full_cfg = cfg.clone().with_seed(rng::derive_seed(
            cfg.rng_seed,
            StreamKind::Repeat,
            u64::MAX - repeat as u64,
        ));
        let (_, oob) = train_forest(matrix, y, &full_cfg)?;
        let mut oob_scores = Vec::new();
        let mut oob_labels = Vec::new();
        for (prob, &label) in oob.per_row.iter().zip(y) {
            if let Some(p) = prob {
                oob_scores.push(*p);
                oob_labels.push(label);
            }
        }
        let oob_metrics = score_metrics(&oob_scores, &oob_labels).ok();

        per_repeat.push(RepeatOutcome {
            heldout,
            oob: oob_metrics,
        });
    }

    let heldout: Vec<Metrics> = per_repeat.iter().map(|r| r.heldout).collect();
    let oob: Vec<Metrics> = per_repeat.iter().filter_map(|r| r.oob).collect();
    let (heldout_mean, heldout_sd) = aggregate(&heldout);
    let (oob_mean, oob_sd) = if oob.len() == per_repeat.len() {
        let (m, s) = aggregate(&oob);
        (Some(m), Some(s))
    } else {
        (None, None)
    };

    Ok(CVReport {
        per_repeat,
        heldout_mean,
        heldout_sd,
        oob_mean,
        oob_sd,
    })
}

fn aggregate(items: &[Metrics]) -> (Metrics, Metrics) {
    let n = items.len() as f64;
    let mean = Metrics {
        auc: items.iter().map(|m| m.auc).sum::<f64>() / n,
        mse: items.iter().map(|m| m.mse).sum::<f64>() / n,
        r2: items.iter().map(|m| m.r2).sum::<f64>() / n,
    };
    let sd = if items.len() > 1 {
        let var = |f: fn(&Metrics) -> f64, mu: f64| {
            (items.iter().map(|m| (f(m) - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Metrics {
            auc: var(|m| m.auc, mean.auc),
            mse: var(|m| m.mse, mean.mse),
            r2: var(|m| m.r2, mean.r2),
        }
    } else {
        Metrics {
            auc: 0.0,
            mse: 0.0,
            r2: 0.0,
        }
    };
    (mean, sd)
}
