//! Summary statistics for strategy comparisons.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Relative time saved by `resource_time` over `query_time`, in percent.
/// Negative when the second time is larger.
pub fn improvement_percent(query_time: f64, resource_time: f64) -> Result<f64> {
    if query_time.is_nan() || query_time <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "reference time must be positive, got {query_time}"
        )));
    }
    Ok(100.0 * (query_time - resource_time) / query_time)
}

/// Minimum number of non-zero paired differences accepted by
/// [`wilcoxon_signed_rank`].
pub const WILCOXON_MIN_PAIRS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Non-zero differences used.
    pub n: usize,
    /// Rank sum of pairs with `a > b`.
    pub w_plus: f64,
    /// Rank sum of pairs with `a < b`.
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`.
    pub w: f64,
    /// Normal deviate of `w`, continuity-corrected; never positive.
    pub z: f64,
    /// Two-tailed p-value from the normal approximation.
    pub p: f64,
    /// Mean rank of the pairs where `a` is smaller (0 if there are none).
    pub mean_rank_a: f64,
    /// Mean rank of the pairs where `b` is smaller (0 if there are none).
    pub mean_rank_b: f64,
}

/// Ranks `values` from 1, giving tied values the average of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Wilcoxon signed-rank test on paired samples `(a, b)`.
///
/// Zero differences are dropped and absolute differences ranked with
/// average ranks for ties. The deviate is
/// `(W - n(n+1)/4 + 1/2) / σ` with `σ² = n(n+1)(2n+1)/24 - Σ(t³-t)/48`
/// over tie groups of size `t`, clamped at zero.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < WILCOXON_MIN_PAIRS {
        return Err(Error::TooFewDifferences {
            found: n,
            needed: WILCOXON_MIN_PAIRS,
        });
    }

    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let (mut w_plus, mut w_minus) = (0.0, 0.0);
    let (mut n_plus, mut n_minus) = (0usize, 0usize);
    for (d, r) in diffs.iter().zip(&ranks) {
        if *d > 0.0 {
            w_plus += r;
            n_plus += 1;
        } else {
            w_minus += r;
            n_minus += 1;
        }
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
    variance -= tie_groups(&abs)
        .map(|t| {
            let t = t as f64;
            (t * t * t - t) / 48.0
        })
        .sum::<f64>();
    let w = w_plus.min(w_minus);
    let z = if variance > 0.0 {
        ((w - mean + 0.5) / variance.sqrt()).min(0.0)
    } else {
        0.0
    };
    let normal = Normal::standard();
    let p = (2.0 * normal.cdf(z)).min(1.0);

    let mean_of = |sum: f64, count: usize| if count == 0 { 0.0 } else { sum / count as f64 };
    Ok(WilcoxonResult {
        n,
        w_plus,
        w_minus,
        w,
        z,
        p,
        // a is smaller exactly where the difference is negative
        mean_rank_a: mean_of(w_minus, n_minus),
        mean_rank_b: mean_of(w_plus, n_plus),
    })
}

fn tie_groups(values: &[f64]) -> impl Iterator<Item = usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > 1 {
            groups.push(j - i);
        }
        i = j;
    }
    groups.into_iter()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`; the maximum falls in the last
/// bin. When all values are equal they share the first bin.
pub fn histogram(values: &[f64], n_bins: usize) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("histogram of no values".into()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / n_bins as f64;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            lower: min + width * i as f64,
            count: 0,
        })
        .collect();
    for &v in values {
        let i = if width > 0.0 {
            (((v - min) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        bins[i].count += 1;
    }
    Ok(bins)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Percentile bootstrap confidence interval for the mean.
pub fn bootstrap_mean_ci<R: Rng + ?Sized>(
    values: &[f64],
    confidence: f64,
    resamples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if values.is_empty() || resamples == 0 {
        return Err(Error::InvalidArgument("bootstrap needs values and resamples".into()));
    }
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok((at(alpha), at(1.0 - alpha)))
}
