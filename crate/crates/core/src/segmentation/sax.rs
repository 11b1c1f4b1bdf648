//! Vertical-binning symbolization and the run-collapsing segmenter built on it.

use super::matrix::equal_width_bin;
use super::{segment_columns, SegmentError};
use crate::types::{Sample, SegmentMap};

/// Number of bins the segmenter starts from.
pub const BASE_BINS: usize = 3;

/// Maps each value to its equal-width bin over `[min, max]` of the series.
///
/// Bins are half-open `[lo, hi)` except the top one, which is closed. A constant
/// series maps to all zeros.
pub fn sax_transform(series: &[f64], bins: usize) -> Result<Vec<usize>, SegmentError> {
    if bins < 2 {
        return Err(SegmentError::InvalidBins(bins));
    }
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(series.iter().map(|&x| equal_width_bin(x, lo, hi, bins)).collect())
}

/// Lengths of maximal runs of equal symbols.
pub fn run_lengths<T: PartialEq>(symbols: &[T]) -> Vec<usize> {
    let mut runs: Vec<usize> = Vec::new();
    for (i, s) in symbols.iter().enumerate() {
        if i > 0 && symbols[i - 1] == *s {
            *runs.last_mut().unwrap() += 1;
        } else {
            runs.push(1);
        }
    }
    runs
}

/// Accepted segment-count band `[lo, hi]` around `k`: ten percent either side,
/// rounded outward, never narrower than one segment.
pub fn sax_band(k: usize) -> (usize, usize) {
    let lo = (9 * k / 10).min(k.saturating_sub(1));
    let hi = (11 * k).div_ceil(10).max(k + 1);
    (lo, hi)
}

/// Run count of the symbolization at every bin count in `3..=max_bins`.
pub fn sax_run_counts(series: &[f64], max_bins: usize) -> Vec<(usize, usize)> {
    (BASE_BINS..=max_bins)
        .map(|b| {
            let symbols = sax_transform(series, b).expect("b >= 3");
            (b, run_lengths(&symbols).len())
        })
        .collect()
}

fn sax_runs_for_column(series: &[f64], k: usize) -> Vec<usize> {
    let (lo, hi) = sax_band(k);
    let max_bins = series.len().max(BASE_BINS);
    let mut closest: Option<(usize, Vec<usize>)> = None;
    for b in BASE_BINS..=max_bins {
        let runs = run_lengths(&sax_transform(series, b).expect("b >= 3"));
        let count = runs.len();
        if (lo..=hi).contains(&count) {
            return runs;
        }
        let gap = count.abs_diff(k);
        if closest.as_ref().is_none_or(|(g, _)| gap < *g) {
            closest = Some((gap, runs));
        }
    }
    closest.expect("at least one bin count is tried").1
}

/// Raises the bin count from 3 until the run count lands near `k`; falls back to
/// the closest count seen when no bin count up to `T` reaches the band.
pub fn segment_sax(sample: &Sample, k: usize) -> Result<SegmentMap, SegmentError> {
    let n = sample.timesteps();
    if k < 2 || k >= n {
        return Err(SegmentError::InvalidK {
            k,
            reason: format!("must satisfy 2 <= k < T = {n}"),
        });
    }
    segment_columns(sample, |column| Ok(sax_runs_for_column(column, k)))
}
