//! ROC/AUC, Hosmer-Lemeshow calibration, and the Youden threshold.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// AUC as the Mann-Whitney pair statistic (ties count half) plus the ROC
/// polyline from a descending threshold sweep over distinct scores.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<(f64, Vec<RocPoint>), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch(scores.len(), labels.len()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::OneClassOnly);
    }

    // midrank sum of positives
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j share the midrank
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let n_pos_f = n_pos as f64;
    let n_neg_f = n_neg as f64;
    let auc = (rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg_f);

    // threshold sweep, descending; the opening threshold sits above the
    // maximum score (classifies nothing positive) and stays finite for JSON
    let mut points = vec![RocPoint {
        threshold: scores[order[order.len() - 1]] + 1.0,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut k = order.len();
    while k > 0 {
        let score = scores[order[k - 1]];
        while k > 0 && scores[order[k - 1]] == score {
            if labels[order[k - 1]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k -= 1;
        }
        points.push(RocPoint {
            threshold: score,
            fpr: fp as f64 / n_neg_f,
            tpr: tp as f64 / n_pos_f,
        });
    }
    Ok((auc, points))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlGroup {
    pub n: usize,
    pub observed: f64,
    pub expected: f64,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlResult {
    pub chi_square: f64,
    pub p_value: f64,
    pub df: usize,
    pub n_degenerate: usize,
    pub groups: Vec<HlGroup>,
}

/// Group rows into `bins` near-equal risk groups (rows sorted by score; tied
/// scores never straddle a boundary) and compute the Hosmer-Lemeshow
/// chi-square with `groups - 2` degrees of freedom.
pub fn hosmer_lemeshow(scores: &[f64], labels: &[u8], bins: usize) -> Result<HlResult, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch(scores.len(), labels.len()));
    }
    let n = scores.len();
    if bins < 2 {
        return Err(EvalError::InvalidArgument("need at least 2 bins".into()));
    }
    if n < bins {
        return Err(EvalError::InvalidArgument(format!(
            "{n} rows cannot fill {bins} groups"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut groups = Vec::new();
    let mut start = 0usize;
    for g in 0..bins {
        if start >= n {
            break;
        }
        let mut end = (((g + 1) * n) as f64 / bins as f64).round() as usize;
        if g == bins - 1 {
            end = n;
        }
        // tied scores stay together
        while end < n && end > 0 && scores[order[end]] == scores[order[end - 1]] {
            end += 1;
        }
        if end <= start {
            continue;
        }
        let slice = &order[start..end];
        let observed = slice.iter().filter(|&&i| labels[i] == 1).count() as f64;
        let expected: f64 = slice.iter().map(|&i| scores[i]).sum();
        groups.push(HlGroup {
            n: slice.len(),
            observed,
            expected,
            mean_score: expected / slice.len() as f64,
        });
        start = end;
    }

    let (chi_square, n_degenerate) = hl_chi_square_from_groups(&groups);
    let effective = groups.len() - n_degenerate;
    let (df, p_value) = if effective > 2 {
        let df = effective - 2;
        let dist = ChiSquared::new(df as f64)
            .map_err(|e| EvalError::InvalidArgument(e.to_string()))?;
        (df, 1.0 - dist.cdf(chi_square))
    } else {
        // too few informative groups to test; report as untestable
        (0, 1.0)
    };

    Ok(HlResult {
        chi_square,
        p_value,
        df,
        n_degenerate,
        groups,
    })
}

/// chi^2 = sum (O-E)^2 / (E (1 - E/n)); groups with E = 0 or E = n contribute
/// nothing (they reduce the degrees of freedom instead).
pub fn hl_chi_square_from_groups(groups: &[HlGroup]) -> (f64, usize) {
    let mut chi = 0.0;
    let mut degenerate = 0usize;
    for g in groups {
        let ng = g.n as f64;
        if g.expected <= 0.0 || g.expected >= ng {
            degenerate += 1;
            continue;
        }
        let denom = g.expected * (1.0 - g.expected / ng);
        chi += (g.observed - g.expected).powi(2) / denom;
    }
    (chi, degenerate)
}

/// Threshold maximizing J = sensitivity + specificity - 1 over midpoints of
/// adjacent distinct scores (classification rule: score >= threshold is
/// positive). Ties resolve to the lowest threshold.
pub fn youden_threshold(scores: &[f64], labels: &[u8]) -> Result<(f64, f64), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch(scores.len(), labels.len()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::OneClassOnly);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let j_at = |pos_le: usize, neg_le: usize| -> f64 {
        let tp = (n_pos - pos_le) as f64;
        tp / n_pos as f64 + neg_le as f64 / n_neg as f64 - 1.0
    };

    // threshold at the minimum score marks everything positive: J = 0
    let mut best_t = scores[order[0]];
    let mut best_j = 0.0;
    let mut pos_le = 0usize;
    let mut neg_le = 0usize;
    let mut i = 0usize;
    while i < order.len() {
        let v = scores[order[i]];
        while i < order.len() && scores[order[i]] == v {
            if labels[order[i]] == 1 {
                pos_le += 1;
            } else {
                neg_le += 1;
            }
            i += 1;
        }
        if i < order.len() {
            let next = scores[order[i]];
            let threshold = v + (next - v) / 2.0;
            let j = j_at(pos_le, neg_le);
            if j > best_j {
                best_j = j;
                best_t = threshold;
            }
        }
    }
    Ok((best_t, best_j))
}
