//! Experiment report assembly and plot-ready CSV series.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{hosmer_lemeshow, roc_auc, youden_threshold, HlGroup, RocPoint};
use super::{EvalError, ScoredSet};

/// Box-plot data for one class's score distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassQuartiles {
    pub label: u8,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub k: usize,
    pub ari: Option<f64>,
    pub medoids: Vec<usize>,
    pub assignments: Vec<usize>,
    /// First two principal-component coordinates per row.
    pub pca_coords: Vec<[f64; 2]>,
    pub explained: [f64; 2],
}

/// Clustering inputs for [`assemble_report`].
#[derive(Debug, Clone)]
pub struct ClusteringOutcome {
    pub k: usize,
    pub ari: Option<f64>,
    pub medoids: Vec<usize>,
    pub assignments: Vec<usize>,
    pub pca_coords: Vec<[f64; 2]>,
    pub explained: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub n_positive: usize,
    pub auc: f64,
    pub mse: f64,
    pub r2: f64,
    pub hl_chi_square: f64,
    pub hl_p: f64,
    pub hl_df: usize,
    pub youden_threshold: f64,
    pub youden_j: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub roc_points: Vec<RocPoint>,
    pub calibration_deciles: Vec<HlGroup>,
    pub score_dist: Vec<ClassQuartiles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clustering: Option<ClusteringReport>,
}

/// Compute every metric of a scored set at once. `bins` is the calibration
/// decile count (10 in the experiments).
pub fn assemble_report(
    scored: &ScoredSet,
    bins: usize,
    clustering: Option<ClusteringOutcome>,
) -> Result<EvaluationReport, EvalError> {
    let n = scored.len();
    if n == 0 {
        return Err(EvalError::InvalidArgument("empty scored set".into()));
    }
    let (auc, roc_points) = roc_auc(&scored.scores, &scored.labels)?;
    let hl = hosmer_lemeshow(&scored.scores, &scored.labels, bins)?;
    let (threshold, j) = youden_threshold(&scored.scores, &scored.labels)?;

    let n_pos = scored.n_positive();
    let n_neg = n - n_pos;
    let tp = scored
        .scores
        .iter()
        .zip(&scored.labels)
        .filter(|(&s, &l)| l == 1 && s >= threshold)
        .count();
    let tn = scored
        .scores
        .iter()
        .zip(&scored.labels)
        .filter(|(&s, &l)| l == 0 && s < threshold)
        .count();

    let mse = scored
        .scores
        .iter()
        .zip(&scored.labels)
        .map(|(&s, &l)| (l as f64 - s).powi(2))
        .sum::<f64>()
        / n as f64;
    let prevalence = n_pos as f64 / n as f64;
    let variance = prevalence * (1.0 - prevalence);

    let score_dist = [0u8, 1]
        .iter()
        .map(|&label| {
            let scores: Vec<f64> = scored
                .scores
                .iter()
                .zip(&scored.labels)
                .filter(|(_, &l)| l == label)
                .map(|(&s, _)| s)
                .collect();
            quartiles(label, &scores)
        })
        .collect();

    Ok(EvaluationReport {
        n,
        n_positive: n_pos,
        auc,
        mse,
        r2: 1.0 - mse / variance,
        hl_chi_square: hl.chi_square,
        hl_p: hl.p_value,
        hl_df: hl.df,
        youden_threshold: threshold,
        youden_j: j,
        sensitivity: tp as f64 / n_pos as f64,
        specificity: tn as f64 / n_neg as f64,
        roc_points,
        calibration_deciles: hl.groups,
        score_dist,
        clustering: clustering.map(|c| ClusteringReport {
            k: c.k,
            ari: c.ari,
            medoids: c.medoids,
            assignments: c.assignments,
            pca_coords: c.pca_coords,
            explained: c.explained,
        }),
    })
}

/// Quartiles by linear interpolation between order statistics.
fn quartiles(label: u8, scores: &[f64]) -> ClassQuartiles {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| -> f64 {
        if sorted.is_empty() {
            return f64::NAN;
        }
        let h = p * (sorted.len() as f64 - 1.0);
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    ClassQuartiles {
        label,
        n: sorted.len(),
        min: q(0.0),
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: q(1.0),
    }
}

pub fn write_roc_csv<W: Write>(mut writer: W, points: &[RocPoint]) -> std::io::Result<()> {
    writeln!(writer, "threshold,fpr,tpr")?;
    for p in points {
        writeln!(writer, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
    }
    Ok(())
}

pub fn write_calibration_csv<W: Write>(mut writer: W, groups: &[HlGroup]) -> std::io::Result<()> {
    writeln!(writer, "group,n,mean_score,observed,expected")?;
    for (i, g) in groups.iter().enumerate() {
        writeln!(
            writer,
            "{},{},{},{},{}",
            i + 1,
            g.n,
            g.mean_score,
            g.observed,
            g.expected
        )?;
    }
    Ok(())
}

pub fn write_score_dist_csv<W: Write>(
    mut writer: W,
    dist: &[ClassQuartiles],
) -> std::io::Result<()> {
    writeln!(writer, "label,n,min,q1,median,q3,max")?;
    for d in dist {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            d.label, d.n, d.min, d.q1, d.median, d.q3, d.max
        )?;
    }
    Ok(())
}

/// One row per clustered edge: key, cluster id, 2-D coordinates, and the
/// ground-truth label when known.
pub fn write_clusters_csv<W: Write>(
    mut writer: W,
    keys: &[(String, String)],
    clustering: &ClusteringReport,
    labels: Option<&[crate::matrix::EdgeLabel]>,
) -> std::io::Result<()> {
    writeln!(writer, "source,target,cluster,pca1,pca2,label")?;
    for (i, key) in keys.iter().enumerate() {
        let label = labels.map_or(String::new(), |ls| ls[i].to_string());
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            key.0,
            key.1,
            clustering.assignments[i],
            clustering.pca_coords[i][0],
            clustering.pca_coords[i][1],
            label
        )?;
    }
    Ok(())
}
