//! Principal component analysis via eigendecomposition of the correlation
//! matrix of the column-standardized input.

use nalgebra::{DMatrix, DVector};

use super::{standardize_columns, StatsError};

#[derive(Debug, Clone)]
pub struct Pca {
    /// Orthonormal components, one row per component (length = kept columns).
    pub components: Vec<Vec<f64>>,
    /// Projected coordinates, one row per input row (length = k).
    pub coords: Vec<Vec<f64>>,
    /// Explained-variance ratios, non-increasing, sum <= 1.
    pub explained: Vec<f64>,
    /// Indices of the input columns that survived standardization.
    pub kept_columns: Vec<usize>,
}

/// Fit `k` principal components. Columns are standardized internally and
/// zero-variance columns dropped; component signs are fixed by making each
/// component's largest-magnitude loading positive.
pub fn pca(rows: &[Vec<f64>], k: usize) -> Result<Pca, StatsError> {
    if rows.len() < 2 {
        return Err(StatsError::InvalidArgument(
            "pca needs at least 2 rows".into(),
        ));
    }
    let (std_rows, kept) = standardize_columns(rows);
    let p = kept.len();
    if p == 0 {
        return Err(StatsError::Degenerate(
            "all columns have zero variance".into(),
        ));
    }
    if k > p {
        return Err(StatsError::InvalidArgument(format!(
            "k={k} exceeds usable columns {p}"
        )));
    }
    let n = std_rows.len();
    let x = DMatrix::from_fn(n, p, |i, j| std_rows[i][j]);
    let cov = x.transpose() * &x / (n as f64 - 1.0);
    let eig = cov.symmetric_eigen();

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let trace: f64 = eig.eigenvalues.iter().map(|&v| v.max(0.0)).sum();
    let mut components = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut v: DVector<f64> = eig.eigenvectors.column(idx).into();
        // deterministic sign: largest-|loading| entry positive, lowest index on ties
        let mut pivot = 0;
        for (i, val) in v.iter().enumerate() {
            if val.abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        components.push(v.iter().copied().collect::<Vec<f64>>());
        explained.push(if trace > 0.0 {
            eig.eigenvalues[idx].max(0.0) / trace
        } else {
            0.0
        });
    }

    let coords = std_rows
        .iter()
        .map(|row| {
            components
                .iter()
                .map(|c| row.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();

    Ok(Pca {
        components,
        coords,
        explained,
        kept_columns: kept,
    })
}
