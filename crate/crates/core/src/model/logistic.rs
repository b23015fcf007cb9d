//! L2-regularized logistic regression baseline, fit by damped Newton (IRLS).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ModelError, TrainConfig};
use crate::matrix::FeatureMatrix;

const L2_PENALTY: f64 = 1e-4;
const GRADIENT_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 200;

/// Weights live in the standardized feature space; zero-variance columns are
/// inert (sd stored as 0). The intercept is never penalized, so an
/// all-constant feature matrix yields the class prevalence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub schema_hash: String,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2: f64,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn train_logistic(
    matrix: &FeatureMatrix,
    y: &[u8],
    cfg: &TrainConfig,
) -> Result<LogisticModel, ModelError> {
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

    let p_all = matrix.n_columns();
    let nf = n as f64;
    let mut means = vec![0.0; p_all];
    let mut sds = vec![0.0; p_all];
    let mut active = Vec::new();
    for j in 0..p_all {
        let mean = matrix.rows.iter().map(|r| r[j]).sum::<f64>() / nf;
        let var = matrix.rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / nf;
        means[j] = mean;
        if var > 0.0 {
            sds[j] = var.sqrt();
            active.push(j);
        }
    }

    // design matrix: intercept column then active standardized features
    let p = active.len() + 1;
    let x = DMatrix::from_fn(n, p, |i, j| {
        if j == 0 {
            1.0
        } else {
            let col = active[j - 1];
            (matrix.rows[i][col] - means[col]) / sds[col]
        }
    });
    let yv = DVector::from_fn(n, |i, _| y[i] as f64);

    let penalty = |beta: &DVector<f64>| {
        let mut masked = beta.clone();
        masked[0] = 0.0;
        masked
    };
    let loss = |beta: &DVector<f64>| -> f64 {
        let z = &x * beta;
        let mut total = 0.0;
        for i in 0..n {
            // log(1 + exp(z)) - y*z, stable form
            let zi = z[i];
            total += if zi > 0.0 {
                zi + (1.0 + (-zi).exp()).ln()
            } else {
                (1.0 + zi.exp()).ln()
            } - yv[i] * zi;
        }
        let m = penalty(beta);
        total + 0.5 * L2_PENALTY * m.dot(&m)
    };

    let mut beta = DVector::zeros(p);
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    while iterations < MAX_ITERATIONS {
        let z = &x * &beta;
        let probs = z.map(sigmoid);
        let grad = x.transpose() * (&yv - &probs) - L2_PENALTY * penalty(&beta);
        grad_norm = grad.norm();
        if grad_norm < GRADIENT_TOLERANCE {
            break;
        }

        let w = probs.map(|pi| (pi * (1.0 - pi)).max(1e-10));
        let mut h = DMatrix::zeros(p, p);
        for i in 0..n {
            let row = x.row(i);
            for a in 0..p {
                for b in a..p {
                    h[(a, b)] += w[i] * row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
            if a > 0 {
                h[(a, a)] += L2_PENALTY;
            } else {
                h[(a, a)] += 1e-12;
            }
        }

        let step = match h.clone().cholesky() {
            Some(chol) => chol.solve(&grad),
            None => {
                for a in 0..p {
                    h[(a, a)] += 1e-6;
                }
                h.cholesky()
                    .ok_or(ModelError::NonConvergence {
                        gradient_norm: grad_norm,
                    })?
                    .solve(&grad)
            }
        };

        // backtracking keeps Newton from overshooting near separation
        let current = loss(&beta);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &beta + scale * &step;
            if loss(&candidate) <= current {
                beta = candidate;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations += 1;
    }

    if grad_norm >= GRADIENT_TOLERANCE {
        // re-evaluate after the last accepted step
        let z = &x * &beta;
        let probs = z.map(sigmoid);
        let grad = x.transpose() * (&yv - &probs) - L2_PENALTY * penalty(&beta);
        grad_norm = grad.norm();
        if grad_norm >= GRADIENT_TOLERANCE {
            return Err(ModelError::NonConvergence {
                gradient_norm: grad_norm,
            });
        }
    }

    let mut weights = vec![0.0; p_all];
    for (k, &j) in active.iter().enumerate() {
        weights[j] = beta[k + 1];
    }
    Ok(LogisticModel {
        schema_hash: matrix.schema_hash(),
        feature_names: matrix.columns.clone(),
        means,
        sds,
        weights,
        intercept: beta[0],
        l2: L2_PENALTY,
        iterations,
    })
}

impl LogisticModel {
    pub fn predict(&self, row: &[f64]) -> Result<f64, ModelError> {
        if row.len() != self.feature_names.len() {
            return Err(ModelError::RowWidth {
                expected: self.feature_names.len(),
                got: row.len(),
            });
        }
        let mut z = self.intercept;
        for (j, &v) in row.iter().enumerate() {
            if self.sds[j] > 0.0 {
                z += self.weights[j] * (v - self.means[j]) / self.sds[j];
            }
        }
        Ok(sigmoid(z))
    }
}
