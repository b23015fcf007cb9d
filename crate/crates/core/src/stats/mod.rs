//! Distribution statistics, hypothesis tests, and linear projections.
//!
//! Statistics on too-small samples come back as `None` ("undefined-flagged")
//! rather than NaN; featurization downstream maps those to 0 plus a
//! missingness indicator. All functions here are pure.

mod ks;
mod pca;

pub use ks::ks_two_sample;
pub use pca::{pca, Pca};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// The full summary extracted per distribution zone.
///
/// `None` marks a statistic that is undefined at this sample size (or for an
/// empty sample). Spread measures of constant samples are defined as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    pub median: Option<f64>,
    pub mad: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub l3: Option<f64>,
    pub l4: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl DistributionSummary {
    pub fn from_sample(values: &[f64]) -> Self {
        let n = values.len();
        let (mean, sd, skewness, kurtosis) = moments(values);
        let (median, mad) = median_mad(values);
        let (l1, l2, l3, l4) = l_moments(values);
        let min = values.iter().copied().reduce(f64::min);
        let max = values.iter().copied().reduce(f64::max);
        DistributionSummary {
            n,
            mean,
            sd,
            skewness,
            kurtosis,
            median,
            mad,
            l1,
            l2,
            l3,
            l4,
            min,
            max,
        }
    }

    /// True when any statistic is undefined at this sample size.
    pub fn has_undefined(&self) -> bool {
        self.n < 4
    }
}

/// Mean, sample standard deviation (n-1), adjusted Fisher-Pearson sample
/// skewness, and adjusted sample excess kurtosis.
///
/// Skewness needs n >= 3, kurtosis n >= 4; zero-spread samples report 0 for
/// both rather than an undefined value.
pub fn moments(values: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None, None, None);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let sd = if n >= 2 {
        Some((m2 * nf / (nf - 1.0)).sqrt())
    } else {
        None
    };
    let skewness = if n >= 3 {
        if m2 == 0.0 {
            Some(0.0)
        } else {
            let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;
            let g1 = m3 / m2.powf(1.5);
            Some(g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0))
        }
    } else {
        None
    };
    let kurtosis = if n >= 4 {
        if m2 == 0.0 {
            Some(0.0)
        } else {
            let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
            let g2 = m4 / (m2 * m2) - 3.0;
            Some(((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)))
        }
    } else {
        None
    };
    (Some(mean), sd, skewness, kurtosis)
}

/// Median (mean of the two middle order statistics for even n) and the
/// unscaled median absolute deviation from it.
pub fn median_mad(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let med = median_of(values);
    let deviations: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    (Some(med), Some(median_of(&deviations)))
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// The first four sample L-moments in the direct order-statistic U-statistic
/// form: each `l_r` averages the r-point L-moment kernel over all
/// C(n, r) subsets, evaluated here through order-statistic weights.
///
/// `l_r` is undefined for n < r.
pub fn l_moments(values: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None, None, None);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;

    let l1 = Some(sorted.iter().sum::<f64>() / nf);

    let l2 = (n >= 2).then(|| {
        let total: f64 = sorted
            .iter()
            .enumerate()
            .map(|(idx, &x)| {
                let i = (idx + 1) as f64;
                ((i - 1.0) - (nf - i)) * x
            })
            .sum();
        total / (2.0 * binom(n, 2))
    });

    let l3 = (n >= 3).then(|| {
        let total: f64 = sorted
            .iter()
            .enumerate()
            .map(|(idx, &x)| {
                let below = idx as f64; // i - 1
                let above = nf - (idx + 1) as f64; // n - i
                (c2(below) - 2.0 * below * above + c2(above)) * x
            })
            .sum();
        total / (3.0 * binom(n, 3))
    });

    let l4 = (n >= 4).then(|| {
        let total: f64 = sorted
            .iter()
            .enumerate()
            .map(|(idx, &x)| {
                let below = idx as f64;
                let above = nf - (idx + 1) as f64;
                (c3(below) - 3.0 * c2(below) * above + 3.0 * below * c2(above) - c3(above)) * x
            })
            .sum();
        total / (4.0 * binom(n, 4))
    });

    (l1, l2, l3, l4)
}

fn c2(m: f64) -> f64 {
    m * (m - 1.0) / 2.0
}

fn c3(m: f64) -> f64 {
    m * (m - 1.0) * (m - 2.0) / 6.0
}

fn binom(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (k - i) as f64;
    }
    acc
}

/// Z-score of `x` against the sample, population standard deviation.
///
/// Returns `(0.0, true)` when the sample cannot define a z-score (fewer than
/// two values, or zero spread).
pub fn zscore(x: f64, sample: &[f64]) -> (f64, bool) {
    let n = sample.len();
    if n < 2 {
        return (0.0, true);
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    if var == 0.0 {
        return (0.0, true);
    }
    ((x - mean) / var.sqrt(), false)
}

/// Standardize columns to zero mean and unit (sample) variance; columns with
/// zero variance are dropped. Returns the standardized rows and the indices
/// of the kept columns.
pub fn standardize_columns(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    if rows.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let n = rows.len() as f64;
    let p = rows[0].len();
    let mut kept = Vec::new();
    let mut means = Vec::new();
    let mut sds = Vec::new();
    for j in 0..p {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let ss = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>();
        if ss > 0.0 && n > 1.0 {
            kept.push(j);
            means.push(mean);
            sds.push((ss / (n - 1.0)).sqrt());
        }
    }
    let out = rows
        .iter()
        .map(|r| {
            kept.iter()
                .enumerate()
                .map(|(k, &j)| (r[j] - means[k]) / sds[k])
                .collect()
        })
        .collect();
    (out, kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_constant_sample() {
        let (mean, sd, skew, _) = moments(&[2.0, 2.0, 2.0]);
        assert_eq!(mean, Some(2.0));
        assert_eq!(sd, Some(0.0));
        assert_eq!(skew, Some(0.0));
    }

    #[test]
    fn moments_sd_matches_hand_value() {
        // var = ((1.5)^2 + (0.5)^2 + (0.5)^2 + (1.5)^2) / 3 = 5/3
        let (mean, sd, _, _) = moments(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, Some(2.5));
        assert_relative_eq!(sd.unwrap(), (5.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(sd.unwrap(), 1.2909944487, epsilon = 1e-9);
    }

    #[test]
    fn skewness_adjusted_small_sample() {
        // m2 = 3/16, m3 = 3/32; g1 = (3/32)/(3/16)^1.5; G1 = g1*sqrt(12)/2 = 2
        let (_, _, skew, _) = moments(&[0.0, 0.0, 0.0, 1.0]);
        assert_relative_eq!(skew.unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn kurtosis_matches_direct_formula() {
        let xs = [1.0, 2.0, 2.0, 3.0, 9.0];
        let n = 5.0;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m4 = xs.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let g2 = m4 / (m2 * m2) - 3.0;
        let expected = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
        let (_, _, _, kurt) = moments(&xs);
        assert_relative_eq!(kurt.unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn undefined_flags_by_sample_size() {
        assert_eq!(moments(&[]), (None, None, None, None));
        let (mean, sd, skew, kurt) = moments(&[1.0]);
        assert_eq!(mean, Some(1.0));
        assert_eq!(sd, None);
        assert_eq!(skew, None);
        assert_eq!(kurt, None);
        let (_, sd, skew, kurt) = moments(&[1.0, 2.0]);
        assert!(sd.is_some());
        assert_eq!(skew, None);
        assert_eq!(kurt, None);
    }

    #[test]
    fn median_mad_examples() {
        assert_eq!(
            median_mad(&[1.0, 2.0, 3.0, 4.0, 100.0]),
            (Some(3.0), Some(1.0))
        );
        assert_eq!(median_mad(&[5.0]), (Some(5.0), Some(0.0)));
        assert_eq!(median_mad(&[1.0, 1.0, 2.0, 2.0]), (Some(1.5), Some(0.5)));
        assert_eq!(median_mad(&[]), (None, None));
    }

    #[test]
    fn median_mad_shift_invariance() {
        let xs = [3.0, 1.0, 7.0, 2.0, 2.0];
        let shifted: Vec<f64> = xs.iter().map(|v| v + 11.25).collect();
        let (_, mad_a) = median_mad(&xs);
        let (med_a, _) = median_mad(&xs);
        let (med_b, mad_b) = median_mad(&shifted);
        assert_relative_eq!(med_b.unwrap(), med_a.unwrap() + 11.25, epsilon = 1e-12);
        assert_relative_eq!(mad_b.unwrap(), mad_a.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn l_moments_small_sample() {
        let (l1, l2, l3, l4) = l_moments(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(l1.unwrap(), 2.0, epsilon = 1e-12);
        // all pairs: ((2-1) + (3-1) + (3-2)) / (2*3) = 2/3
        assert_relative_eq!(l2.unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        // single triple: (3 - 2*2 + 1)/3 = 0
        assert_relative_eq!(l3.unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(l4, None);
    }

    /// Exhaustive r-subset oracle for the L-moment U-statistic.
    fn l_moment_oracle(values: &[f64], r: usize) -> f64 {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut total = 0.0;
        let mut count = 0usize;
        let mut subset = vec![0usize; r];
        fn rec(
            sorted: &[f64],
            r: usize,
            start: usize,
            depth: usize,
            subset: &mut Vec<usize>,
            total: &mut f64,
            count: &mut usize,
        ) {
            if depth == r {
                let y: Vec<f64> = subset.iter().map(|&i| sorted[i]).collect();
                let kernel = match r {
                    1 => y[0],
                    2 => (y[1] - y[0]) / 2.0,
                    3 => (y[2] - 2.0 * y[1] + y[0]) / 3.0,
                    4 => (y[3] - 3.0 * y[2] + 3.0 * y[1] - y[0]) / 4.0,
                    _ => unreachable!(),
                };
                *total += kernel;
                *count += 1;
                return;
            }
            for i in start..sorted.len() {
                subset[depth] = i;
                rec(sorted, r, i + 1, depth + 1, subset, total, count);
            }
        }
        rec(&sorted, r, 0, 0, &mut subset, &mut total, &mut count);
        total / count as f64
    }

    #[test]
    fn l_moments_match_subset_oracle() {
        use rand::Rng;
        let mut rng = crate::rng::stream(42, crate::rng::StreamKind::Sampling, 0);
        for _ in 0..200 {
            let n = rng.gen_range(4..=12);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let (l1, l2, l3, l4) = l_moments(&values);
            for (r, got) in [(1, l1), (2, l2), (3, l3), (4, l4)] {
                let want = l_moment_oracle(&values, r);
                assert!(
                    (got.unwrap() - want).abs() < 1e-9,
                    "l{r} mismatch: {} vs {}",
                    got.unwrap(),
                    want
                );
            }
        }
    }

    #[test]
    fn l1_is_mean_and_l2_nonnegative() {
        use rand::Rng;
        let mut rng = crate::rng::stream(9, crate::rng::StreamKind::Sampling, 1);
        for _ in 0..100 {
            let n = rng.gen_range(2..=30);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let (l1, l2, _, _) = l_moments(&values);
            let mean = values.iter().sum::<f64>() / n as f64;
            assert_relative_eq!(l1.unwrap(), mean, epsilon = 1e-9);
            assert!(l2.unwrap() >= -1e-12);
        }
    }

    #[test]
    fn zscore_conventions() {
        let (z, degen) = zscore(2.0, &[1.0, 3.0]);
        assert_eq!((z, degen), (0.0, false)); // x == mean
        let (z, degen) = zscore(3.0, &[1.0, 3.0]);
        assert_eq!((z, degen), (1.0, false)); // population sd = 1
        assert_eq!(zscore(5.0, &[2.0, 2.0, 2.0]), (0.0, true));
        assert_eq!(zscore(5.0, &[2.0]), (0.0, true));
    }

    #[test]
    fn zscore_of_own_sample_is_standardized() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, crate::rng::StreamKind::Sampling, 2);
        let values: Vec<f64> = (0..200).map(|_| rng.gen_range(-3.0..9.0)).collect();
        let zs: Vec<f64> = values.iter().map(|&v| zscore(v, &values).0).collect();
        let mean = zs.iter().sum::<f64>() / zs.len() as f64;
        let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / zs.len() as f64;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn summary_collects_everything() {
        let s = DistributionSummary::from_sample(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.n, 4);
        assert_eq!(s.min, Some(1.0));
        assert_eq!(s.max, Some(4.0));
        assert!(s.l4.is_some());
        assert!(!s.has_undefined());
        let tiny = DistributionSummary::from_sample(&[1.0]);
        assert!(tiny.has_undefined());
        assert_eq!(tiny.mad, Some(0.0));
    }
}
