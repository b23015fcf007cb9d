//! Depth-limited binary classification tree with Gini splits.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Nested split/leaf representation; this is also the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Class-probability vector [p(class 0), p(class 1)].
        probs: [f64; 2],
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> [f64; 2] {
        match self {
            TreeNode::Leaf { probs } => *probs,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: usize,
}

pub(crate) struct TreeBuilder<'a> {
    pub rows: &'a [Vec<f64>],
    pub y: &'a [u8],
    pub params: GrowParams,
    /// Total Gini impurity decrease attributed to each feature.
    pub importance: Vec<f64>,
    n_root: f64,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(rows: &'a [Vec<f64>], y: &'a [u8], params: GrowParams) -> Self {
        let p = rows.first().map_or(0, |r| r.len());
        TreeBuilder {
            rows,
            y,
            params,
            importance: vec![0.0; p],
            n_root: 0.0,
        }
    }

    pub fn grow(&mut self, sample: Vec<usize>, rng: &mut ChaCha8Rng) -> TreeNode {
        self.n_root = sample.len() as f64;
        self.grow_node(sample, 0, rng)
    }

    fn grow_node(&mut self, indices: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
        let n = indices.len();
        let pos = indices.iter().filter(|&&i| self.y[i] == 1).count();
        let leaf = |pos: usize, n: usize| TreeNode::Leaf {
            probs: [(n - pos) as f64 / n as f64, pos as f64 / n as f64],
        };
        if depth >= self.params.max_depth
            || pos == 0
            || pos == n
            || n < 2 * self.params.min_leaf
        {
            return leaf(pos, n);
        }

        let Some(split) = self.best_split(&indices, pos, rng) else {
            return leaf(pos, n);
        };

        self.importance[split.feature] += (n as f64 / self.n_root) * split.decrease;

        let (mut left, mut right) = (Vec::new(), Vec::new());
        for i in indices {
            if self.rows[i][split.feature] <= split.threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow_node(left, depth + 1, rng)),
            right: Box::new(self.grow_node(right, depth + 1, rng)),
        }
    }

    /// Best (feature, threshold) by Gini over a random feature subset.
    /// Ties go to the lowest feature index, then the lowest threshold.
    fn best_split(&self, indices: &[usize], pos: usize, rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let p = self.importance.len();
        let k = self.params.features_per_split.min(p).max(1);
        let mut candidates = sample_distinct(p, k, rng);
        candidates.sort_unstable();

        let n = indices.len() as f64;
        let parent_gini = gini(pos as f64, n);
        let mut best: Option<BestSplit> = None;

        let mut values: Vec<(f64, u8)> = Vec::with_capacity(indices.len());
        for &feature in &candidates {
            values.clear();
            values.extend(
                indices
                    .iter()
                    .map(|&i| (self.rows[i][feature], self.y[i])),
            );
            values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            // walk runs of equal values; candidate cuts lie between runs
            let mut pos_le = 0f64;
            let mut n_le = 0f64;
            let mut idx = 0usize;
            while idx < values.len() {
                let v = values[idx].0;
                while idx < values.len() && values[idx].0 == v {
                    pos_le += values[idx].1 as f64;
                    n_le += 1.0;
                    idx += 1;
                }
                if idx == values.len() {
                    break;
                }
                let n_left = n_le;
                let n_right = n - n_le;
                if (n_left as usize) < self.params.min_leaf
                    || (n_right as usize) < self.params.min_leaf
                {
                    continue;
                }
                let pos_left = pos_le;
                let pos_right = pos as f64 - pos_le;
                let weighted = (n_left * gini(pos_left, n_left)
                    + n_right * gini(pos_right, n_right))
                    / n;
                let better = match &best {
                    None => true,
                    Some(b) => weighted < b.weighted_gini,
                };
                if better {
                    let lo = v;
                    let hi = values[idx].0;
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        // adjacent floats: fall back to the left value so the
                        // <= rule reproduces the counted partition exactly
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        weighted_gini: weighted,
                        decrease: parent_gini - weighted,
                    });
                }
            }
        }
        best.filter(|b| b.decrease > 0.0)
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    weighted_gini: f64,
    decrease: f64,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p1 = pos / n;
    let p0 = 1.0 - p1;
    1.0 - p0 * p0 - p1 * p1
}

/// Partial Fisher-Yates draw of k distinct indices from 0..p.
fn sample_distinct(p: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..p).collect();
    for i in 0..k.min(p) {
        let j = rng.gen_range(i..p);
        pool.swap(i, j);
    }
    pool.truncate(k.min(p));
    pool
}
