//! Nonparametric percentile bootstrap over participants, stratified by arm.

use rand::Rng;
use rayon::prelude::*;

use super::{estimate, AnalysisTarget, EstimateResult, EstimatorOptions};
use crate::dgp::{split_seed, stream_rng, BOOTSTRAP_STREAM};
use crate::error::{Error, Result};
use crate::potential_outcomes::ObservedRecord;
use crate::scalar::{lit, sample_variance, Real};

/// Largest tolerated share of failed resamples.
pub const MAX_FAILURE_RATE: f64 = 0.10;

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
pub fn quantile_sorted<T: Real>(sorted: &[T], q: f64) -> T {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * lit(h - lo as f64)
}

fn resample<T: Real>(records: &[ObservedRecord<T>], arms: &[Vec<usize>; 2], seed: u64) -> Vec<ObservedRecord<T>> {
    let mut rng = stream_rng(seed, BOOTSTRAP_STREAM);
    let mut out = Vec::with_capacity(records.len());
    for arm in arms {
        for _ in 0..arm.len() {
            out.push(records[arm[rng.random_range(0..arm.len())]].clone());
        }
    }
    out
}

/// Point estimate on the full data with a percentile interval from `n_boot`
/// resamples. The standard error is the resample standard deviation. The
/// interval is widened to contain the point when the bootstrap distribution
/// is skewed past it.
pub fn bootstrap_ci<T: Real>(
    records: &[ObservedRecord<T>],
    target: &AnalysisTarget,
    opts: &EstimatorOptions,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<EstimateResult<T>> {
    if n_boot < 100 {
        return Err(Error::InvalidArgument(format!("n_boot must be at least 100, got {n_boot}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {level}")));
    }
    let full = estimate(records, target, opts)?;
    let mut arms: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, r) in records.iter().enumerate() {
        arms[usize::from(r.x_obs)].push(i);
    }
    let draws: Vec<Option<T>> = (0..n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let s = split_seed(seed, b);
            let data = resample(records, &arms, s);
            let o = EstimatorOptions { seed: s, ..*opts };
            estimate(&data, target, &o).ok().map(|e| e.point)
        })
        .collect();
    let mut points: Vec<T> = draws.iter().flatten().copied().collect();
    let failures = n_boot - points.len();
    if failures as f64 > MAX_FAILURE_RATE * n_boot as f64 {
        return Err(Error::Instability { failures, attempts: n_boot });
    }
    if failures > 0 {
        log::warn!("{failures} of {n_boot} bootstrap resamples failed");
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite bootstrap estimates"));
    let alpha = (1.0 - level) / 2.0;
    let ci_low = quantile_sorted(&points, alpha).min(full.point);
    let ci_high = quantile_sorted(&points, 1.0 - alpha).max(full.point);
    Ok(EstimateResult {
        std_error: sample_variance(&points).sqrt(),
        ci_low,
        ci_high,
        ..full
    })
}
