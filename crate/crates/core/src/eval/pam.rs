//! Partitioning Around Medoids: classic BUILD + SWAP on Euclidean distance
//! over z-standardized feature columns.

use super::EvalError;
use crate::stats::standardize_columns;

#[derive(Debug, Clone, PartialEq)]
pub struct PamResult {
    /// Row indices of the k medoids, in selection order.
    pub medoids: Vec<usize>,
    /// Per row, the position (0..k) of its medoid in `medoids`.
    pub assignments: Vec<usize>,
    /// Total distance of rows to their medoids.
    pub cost: f64,
    /// Cost after each accepted swap (monotone non-increasing).
    pub cost_trace: Vec<f64>,
}

pub fn pam_cluster(rows: &[Vec<f64>], k: usize) -> Result<PamResult, EvalError> {
    let n = rows.len();
    if k < 1 || k > n {
        return Err(EvalError::InvalidArgument(format!(
            "k={k} out of range for {n} rows"
        )));
    }

    let (standardized, kept) = standardize_columns(rows);
    let zero_rows;
    let data: &[Vec<f64>] = if kept.is_empty() {
        zero_rows = vec![vec![0.0]; n];
        &zero_rows
    } else {
        &standardized
    };
    let dist = distance_matrix(data);

    // BUILD: greedy cost reduction, ties to the lowest index
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    for m_index in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for cand in 0..n {
            if medoids.contains(&cand) {
                continue;
            }
            // first pick minimizes total distance; later picks minimize the
            // (non-positive) change in total distance
            let score: f64 = if m_index == 0 {
                (0..n).map(|j| dist[cand][j]).sum()
            } else {
                (0..n)
                    .map(|j| dist[cand][j].min(nearest[j]) - nearest[j])
                    .sum()
            };
            match best {
                None => best = Some((score, cand)),
                Some((s, _)) if score < s => best = Some((score, cand)),
                _ => {}
            }
        }
        let (_, chosen) = best.expect("k <= n leaves a candidate");
        medoids.push(chosen);
        for j in 0..n {
            nearest[j] = nearest[j].min(dist[chosen][j]);
        }
    }

    // SWAP: apply the best improving swap until none remains
    let mut cost_trace = vec![nearest.iter().sum::<f64>()];
    loop {
        let (near, second) = nearest_two(&dist, &medoids);
        let mut best: Option<(f64, usize, usize)> = None;
        for m_pos in 0..medoids.len() {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let mut delta = 0.0;
                for j in 0..n {
                    let d_near = dist[medoids[near[j]]][j];
                    let d_cand = dist[cand][j];
                    if near[j] == m_pos {
                        delta += d_cand.min(second[j]) - d_near;
                    } else if d_cand < d_near {
                        delta += d_cand - d_near;
                    }
                }
                let candidate = (delta, m_pos, cand);
                match best {
                    None => best = Some(candidate),
                    Some((d, mp, c)) => {
                        if delta < d || (delta == d && (m_pos, cand) < (mp, c)) {
                            best = Some(candidate);
                        }
                    }
                }
            }
        }
        match best {
            Some((delta, m_pos, cand)) if delta < -1e-12 => {
                medoids[m_pos] = cand;
                let cost: f64 = {
                    let (near, _) = nearest_two(&dist, &medoids);
                    (0..n).map(|j| dist[medoids[near[j]]][j]).sum()
                };
                cost_trace.push(cost);
            }
            _ => break,
        }
    }

    let (near, _) = nearest_two(&dist, &medoids);
    let cost = (0..n).map(|j| dist[medoids[near[j]]][j]).sum();
    Ok(PamResult {
        assignments: near,
        medoids,
        cost,
        cost_trace,
    })
}

fn distance_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    dist
}

/// Per row: position of nearest medoid (lowest position on ties) and the
/// distance to the second-nearest medoid.
fn nearest_two(dist: &[Vec<f64>], medoids: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let n = dist.len();
    let mut near = vec![0usize; n];
    let mut second = vec![f64::INFINITY; n];
    for j in 0..n {
        let mut best_pos = 0usize;
        let mut best_d = f64::INFINITY;
        let mut second_d = f64::INFINITY;
        for (pos, &m) in medoids.iter().enumerate() {
            let d = dist[m][j];
            if d < best_d {
                second_d = best_d;
                best_d = d;
                best_pos = pos;
            } else if d < second_d {
                second_d = d;
            }
        }
        near[j] = best_pos;
        second[j] = second_d;
    }
    (near, second)
}
