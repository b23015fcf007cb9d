//! Adjusted Rand index via exact integer pair counting.

use std::collections::BTreeMap;

use super::EvalError;

/// Chance-corrected agreement between two partitions, in [-1, 1].
///
/// Both the contingency sums and the final formula stay in integer
/// arithmetic until a single division, so the result matches an exhaustive
/// all-pairs enumeration bit for bit.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::InvalidArgument(
            "need at least 2 points".into(),
        ));
    }

    let mut cells: BTreeMap<(usize, usize), i128> = BTreeMap::new();
    let mut row_sums: BTreeMap<usize, i128> = BTreeMap::new();
    let mut col_sums: BTreeMap<usize, i128> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_insert(0) += 1;
        *row_sums.entry(x).or_insert(0) += 1;
        *col_sums.entry(y).or_insert(0) += 1;
    }

    let c2 = |m: i128| m * (m - 1) / 2;
    let same_same: i128 = cells.values().map(|&m| c2(m)).sum();
    let same_a: i128 = row_sums.values().map(|&m| c2(m)).sum();
    let same_b: i128 = col_sums.values().map(|&m| c2(m)).sum();
    let total = c2(n as i128);

    // pair-confusion counts
    let n11 = same_same;
    let n10 = same_a - same_same;
    let n01 = same_b - same_same;
    let n00 = total - n11 - n10 - n01;

    let numerator = 2 * (n11 * n00 - n10 * n01);
    let denominator = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
    if denominator == 0 {
        // both partitions are trivial (all-singletons or one cluster)
        return Ok(1.0);
    }
    Ok(numerator as f64 / denominator as f64)
}
