//! Bagged forest of Gini trees with out-of-bag bookkeeping.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, TreeBuilder, TreeNode};
use super::{ModelError, TrainConfig};
use crate::matrix::FeatureMatrix;
use crate::rng::{stream, StreamKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: TrainConfig,
    pub schema_hash: String,
    pub feature_names: Vec<String>,
    pub trees: Vec<TreeNode>,
    /// Row indices that were out-of-bag for each tree.
    pub oob_indices: Vec<Vec<u32>>,
    /// Total Gini impurity decrease per feature, summed over trees.
    pub raw_importance: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OobReport {
    /// OOB predicted probability per training row; `None` when a row was
    /// in-bag for every tree.
    pub per_row: Vec<Option<f64>>,
    pub n_covered: usize,
    /// Misclassification rate at the 0.5 cut over covered rows.
    pub error: Option<f64>,
}

/// Train on bootstrap samples; deterministic given `cfg.rng_seed` and
/// independent of thread scheduling (per-tree derived streams).
pub fn train_forest(
    matrix: &FeatureMatrix,
    y: &[u8],
    cfg: &TrainConfig,
) -> Result<(RandomForest, OobReport), ModelError> {
    cfg.validate()?;
    let n = matrix.n_rows();
    if y.len() != n {
        return Err(ModelError::InvalidConfig(format!(
            "{} labels for {} rows",
            y.len(),
            n
        )));
    }
    if n < 10 {
        return Err(ModelError::TooFewRows { n, need: 10 });
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == n {
        return Err(ModelError::SingleClass);
    }
    let p = matrix.n_columns();
    let k = cfg.features_per_split.resolve(p);

    let grown: Vec<(TreeNode, Vec<u32>, Vec<f64>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(cfg.rng_seed, StreamKind::Bootstrap, t as u64);
            let mut in_bag = vec![false; n];
            let sample: Vec<usize> = (0..n)
                .map(|_| {
                    let i = rng.gen_range(0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();
            let oob: Vec<u32> = (0..n as u32).filter(|&i| !in_bag[i as usize]).collect();
            let mut builder = TreeBuilder::new(
                &matrix.rows,
                y,
                GrowParams {
                    max_depth: cfg.max_depth,
                    min_leaf: cfg.min_leaf,
                    features_per_split: k,
                },
            );
            let tree = builder.grow(sample, &mut rng);
            (tree, oob, builder.importance)
        })
        .collect();

    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut oob_indices = Vec::with_capacity(cfg.n_trees);
    let mut raw_importance = vec![0.0; p];
    for (tree, oob, imp) in grown {
        trees.push(tree);
        oob_indices.push(oob);
        for (j, v) in imp.into_iter().enumerate() {
            raw_importance[j] += v;
        }
    }

    let forest = RandomForest {
        config: cfg.clone(),
        schema_hash: matrix.schema_hash(),
        feature_names: matrix.columns.clone(),
        trees,
        oob_indices,
        raw_importance,
    };
    let oob = forest.oob_report(matrix, y);
    Ok((forest, oob))
}

impl RandomForest {
    /// Causality measure for one row: the mean positive-class probability
    /// over all trees.
    pub fn predict(&self, row: &[f64]) -> Result<f64, ModelError> {
        if row.len() != self.feature_names.len() {
            return Err(ModelError::RowWidth {
                expected: self.feature_names.len(),
                got: row.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)[1]).sum();
        Ok(sum / self.trees.len() as f64)
    }

    fn oob_report(&self, matrix: &FeatureMatrix, y: &[u8]) -> OobReport {
        let n = matrix.n_rows();
        let mut sums = vec![0.0f64; n];
        let mut counts = vec![0u32; n];
        for (tree, oob) in self.trees.iter().zip(&self.oob_indices) {
            for &i in oob {
                let i = i as usize;
                sums[i] += tree.predict(&matrix.rows[i])[1];
                counts[i] += 1;
            }
        }
        let per_row: Vec<Option<f64>> = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        let mut covered = 0usize;
        let mut wrong = 0usize;
        for (prob, &label) in per_row.iter().zip(y) {
            if let Some(p) = prob {
                covered += 1;
                if ((*p >= 0.5) as u8) != label {
                    wrong += 1;
                }
            }
        }
        OobReport {
            per_row,
            n_covered: covered,
            error: (covered > 0).then(|| wrong as f64 / covered as f64),
        }
    }
}

/// Gini-decrease relative importance, scaled so the top feature is 1.0,
/// sorted descending (ties by feature order).
pub fn variable_importance(forest: &RandomForest) -> Vec<(String, f64)> {
    let max = forest
        .raw_importance
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    let mut items: Vec<(usize, f64)> = forest
        .raw_importance
        .iter()
        .enumerate()
        .map(|(i, &v)| (i, if max > 0.0 { v / max } else { 0.0 }))
        .collect();
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    items
        .into_iter()
        .map(|(i, v)| (forest.feature_names[i].clone(), v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::schema_hash;
    use crate::model::{FeaturesPerSplit, Model};

    pub(crate) fn matrix_of(columns: Vec<&str>, rows: Vec<Vec<f64>>) -> FeatureMatrix {
        FeatureMatrix {
            schema_version: "test".into(),
            columns: columns.into_iter().map(String::from).collect(),
            keys: (0..rows.len())
                .map(|i| (format!("s{i}"), format!("t{i}")))
                .collect(),
            rows,
        }
    }

    fn blobs(n_per: usize, seed: u64) -> (FeatureMatrix, Vec<u8>) {
        let mut rng = stream(seed, StreamKind::Sampling, 0);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..2 * n_per {
            let label = (i >= n_per) as u8;
            let center = if label == 1 { 4.0 } else { 0.0 };
            rows.push(vec![
                center + rng.gen_range(-1.0..1.0),
                center + rng.gen_range(-1.0..1.0),
            ]);
            y.push(label);
        }
        (matrix_of(vec!["f0", "f1"], rows), y)
    }

    #[test]
    fn rejects_single_class_and_tiny_data() {
        let (m, _) = blobs(10, 1);
        let cfg = TrainConfig::exp1();
        assert!(matches!(
            train_forest(&m, &vec![1u8; 20], &cfg),
            Err(ModelError::SingleClass)
        ));
        let small = m.select(&[0, 1, 2, 3]);
        assert!(matches!(
            train_forest(&small, &[0, 0, 1, 1], &cfg),
            Err(ModelError::TooFewRows { .. })
        ));
    }

    #[test]
    fn separable_blobs_have_high_oob_accuracy() {
        let (m, y) = blobs(50, 2);
        let cfg = TrainConfig {
            n_trees: 20,
            rng_seed: 3,
            ..TrainConfig::default()
        };
        let (_, oob) = train_forest(&m, &y, &cfg).unwrap();
        assert!(oob.n_covered > 80);
        assert!(oob.error.unwrap() <= 0.05, "oob error {:?}", oob.error);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (m, y) = blobs(30, 4);
        let cfg = TrainConfig {
            n_trees: 7,
            rng_seed: 11,
            ..TrainConfig::default()
        };
        let (f1, _) = train_forest(&m, &y, &cfg).unwrap();
        let (f2, _) = train_forest(&m, &y, &cfg).unwrap();
        assert_eq!(
            Model::RandomForest(f1).to_json(),
            Model::RandomForest(f2).to_json()
        );
        let (f3, _) = train_forest(&m, &y, &cfg.clone().with_seed(12)).unwrap();
        assert_ne!(
            Model::RandomForest(train_forest(&m, &y, &cfg).unwrap().0).to_json(),
            Model::RandomForest(f3).to_json()
        );
    }

    #[test]
    fn stump_probabilities_are_pure() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..12).map(|i| (i >= 6) as u8).collect();
        let m = matrix_of(vec!["f"], rows);
        let cfg = TrainConfig {
            n_trees: 1,
            max_depth: 1,
            features_per_split: FeaturesPerSplit::Fixed(1),
            rng_seed: 5,
            ..TrainConfig::default()
        };
        let (forest, _) = train_forest(&m, &y, &cfg).unwrap();
        let lo = forest.predict(&[0.0]).unwrap();
        let hi = forest.predict(&[11.0]).unwrap();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn three_tree_vote_averages() {
        let leaf1 = TreeNode::Leaf { probs: [0.0, 1.0] };
        let leaf0 = TreeNode::Leaf { probs: [1.0, 0.0] };
        let forest = RandomForest {
            config: TrainConfig::exp1(),
            schema_hash: schema_hash("test", &["f".to_string()]),
            feature_names: vec!["f".into()],
            trees: vec![leaf1.clone(), leaf1, leaf0],
            oob_indices: vec![vec![], vec![], vec![]],
            raw_importance: vec![0.0],
        };
        assert_eq!(forest.predict(&[0.0]).unwrap(), 2.0 / 3.0);
        assert!(forest.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn predict_is_pure() {
        let (m, y) = blobs(20, 6);
        let cfg = TrainConfig {
            n_trees: 5,
            rng_seed: 6,
            ..TrainConfig::default()
        };
        let (forest, _) = train_forest(&m, &y, &cfg).unwrap();
        let first = forest.predict(&m.rows[3]).unwrap();
        for _ in 0..10_000 {
            assert_eq!(forest.predict(&m.rows[3]).unwrap(), first);
        }
    }

    #[test]
    fn model_json_round_trip_preserves_predictions() {
        let (m, y) = blobs(30, 7);
        let cfg = TrainConfig {
            n_trees: 9,
            rng_seed: 8,
            ..TrainConfig::default()
        };
        let (forest, _) = train_forest(&m, &y, &cfg).unwrap();
        let model = Model::RandomForest(forest);
        let text = model.to_json();
        let back = Model::from_json(&text).unwrap();
        assert_eq!(model, back);
        for row in &m.rows {
            let a = model.predict_row(row).unwrap();
            let b = back.predict_row(row).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn schema_mismatch_is_detected() {
        let (m, y) = blobs(20, 9);
        let cfg = TrainConfig {
            n_trees: 3,
            rng_seed: 9,
            ..TrainConfig::default()
        };
        let (forest, _) = train_forest(&m, &y, &cfg).unwrap();
        let model = Model::RandomForest(forest);
        assert!(model.predict_matrix(&m).is_ok());
        let mut other = m.clone();
        other.columns[0] = "different".into();
        assert!(matches!(
            model.predict_matrix(&other),
            Err(ModelError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn importance_single_informative_feature() {
        let mut rng = stream(10, StreamKind::Sampling, 1);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|i| vec![rng.gen_range(-1.0..1.0), (i >= 50) as u8 as f64])
            .collect();
        let y: Vec<u8> = (0..100).map(|i| (i >= 50) as u8).collect();
        let m = matrix_of(vec!["noise", "signal"], rows);
        let cfg = TrainConfig {
            n_trees: 10,
            features_per_split: FeaturesPerSplit::Fixed(2),
            rng_seed: 10,
            ..TrainConfig::default()
        };
        let (forest, _) = train_forest(&m, &y, &cfg).unwrap();
        let ranking = variable_importance(&forest);
        assert_eq!(ranking[0].0, "signal");
        assert_eq!(ranking[0].1, 1.0);
        assert_eq!(ranking[1].1, 0.0);
    }

    #[test]
    fn duplicate_feature_splits_importance() {
        let mut rng = stream(11, StreamKind::Sampling, 2);
        let base: Vec<f64> = (0..200).map(|i| i as f64 + rng.gen_range(-0.2..0.2)).collect();
        let y: Vec<u8> = (0..200).map(|i| (i >= 100) as u8).collect();

        let single = matrix_of(vec!["a"], base.iter().map(|&v| vec![v]).collect());
        let dup = matrix_of(
            vec!["a", "b"],
            base.iter().map(|&v| vec![v, v]).collect(),
        );
        let cfg = TrainConfig {
            n_trees: 40,
            features_per_split: FeaturesPerSplit::Fixed(1),
            rng_seed: 12,
            ..TrainConfig::default()
        };
        let (f_single, _) = train_forest(&single, &y, &cfg).unwrap();
        let (f_dup, _) = train_forest(&dup, &y, &cfg).unwrap();
        let total_single: f64 = f_single.raw_importance.iter().sum();
        let total_dup: f64 = f_dup.raw_importance.iter().sum();
        assert!((total_dup - total_single).abs() / total_single < 0.10);
        // both copies carry a meaningful share
        assert!(f_dup.raw_importance.iter().all(|&v| v > 0.2 * total_dup / 2.0));
    }

    #[test]
    fn monotone_transform_leaves_predictions_unchanged() {
        let (m, y) = blobs(25, 13);
        let transformed = matrix_of(
            vec!["f0", "f1"],
            m.rows
                .iter()
                .map(|r| r.iter().map(|&v| v.powi(3)).collect())
                .collect(),
        );
        let cfg = TrainConfig {
            n_trees: 11,
            rng_seed: 14,
            ..TrainConfig::default()
        };
        let (f_raw, _) = train_forest(&m, &y, &cfg).unwrap();
        let (f_cube, _) = train_forest(&transformed, &y, &cfg).unwrap();
        for (row, row_t) in m.rows.iter().zip(&transformed.rows) {
            assert_eq!(
                f_raw.predict(row).unwrap(),
                f_cube.predict(row_t).unwrap()
            );
        }
    }
}
