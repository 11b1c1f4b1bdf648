//! Matrix-profile driven segmenters: slopes (border picking) and bins (claiming).

use super::{borders_to_runs, segment_columns, BinMode, SegmentError, SlopeVariant};
use crate::matrix_profile::compute_matrix_profile;
use crate::types::{Sample, SegmentMap};

/// Profile distances are scale-free; differences below this are treated as ties
/// so that rounding noise (e.g. from an affine rescaling of the input) cannot
/// reorder candidates or move a value across a bin edge.
pub const PROFILE_RESOLUTION: f64 = 1e-9;

fn quantize(x: f64) -> i64 {
    (x / PROFILE_RESOLUTION).round() as i64
}

/// Picks up to `k` border positions from a matrix profile.
///
/// Returned borders are sorted, deduplicated and strictly positive; a border at
/// `i` starts a new segment at timestep `i`.
pub fn slope_borders(profile: &[f64], k: usize, variant: SlopeVariant) -> Vec<usize> {
    // (score, originating profile index), in candidate order
    let candidates: Vec<(f64, usize)> = match variant {
        SlopeVariant::Gradient => profile
            .windows(2)
            .enumerate()
            .map(|(i, w)| ((w[1] - w[0]).abs(), i))
            .collect(),
        SlopeVariant::Sorted => {
            let mut order: Vec<usize> = (0..profile.len()).collect();
            order.sort_by_key(|&i| (quantize(profile[i]), i));
            order
                .windows(2)
                .map(|w| (profile[w[1]] - profile[w[0]], w[1]))
                .collect()
        }
    };
    let mut ranked: Vec<usize> = (0..candidates.len()).collect();
    // stable sort keeps candidate order among equal scores
    ranked.sort_by_key(|&c| std::cmp::Reverse(quantize(candidates[c].0)));
    let mut borders: Vec<usize> = ranked
        .into_iter()
        .take(k)
        .map(|c| candidates[c].1)
        .filter(|&i| i > 0)
        .collect();
    borders.sort_unstable();
    borders.dedup();
    borders
}

pub fn segment_slopes(
    sample: &Sample,
    m: usize,
    k: usize,
    variant: SlopeVariant,
) -> Result<SegmentMap, SegmentError> {
    let n = sample.timesteps();
    if k < 1 {
        return Err(SegmentError::InvalidK {
            k,
            reason: "at least one border is required".into(),
        });
    }
    if k + m > n {
        return Err(SegmentError::InvalidK {
            k,
            reason: format!("must be below T - m + 1 = {}", (n + 1).saturating_sub(m)),
        });
    }
    segment_columns(sample, |column| {
        let mp = compute_matrix_profile(column, m)?;
        Ok(borders_to_runs(n, &slope_borders(mp.distances(), k, variant)))
    })
}

/// Equal-width bin index over `[lo, hi]`; the top edge maps to `bins - 1`.
pub(crate) fn equal_width_bin(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let b = ((x - lo) / (hi - lo) * bins as f64).floor();
    (b.max(0.0) as usize).min(bins - 1)
}

/// Bin index of a profile distance. Positions within [`PROFILE_RESOLUTION`] of
/// an edge snap upward, and a profile whose range is below the resolution is a
/// single bin.
fn profile_bin(d: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi - lo < PROFILE_RESOLUTION {
        return 0;
    }
    let b = ((d - lo) / (hi - lo) * bins as f64 + PROFILE_RESOLUTION).floor();
    (b.max(0.0) as usize).min(bins - 1)
}

/// Per-timestep winning bin value for a profile computed with window `m`.
///
/// Profile index `i` covers timesteps `[i, i + m)`. Each timestep takes the
/// smallest (`Min`) or largest (`Max`) bin among the indices covering it.
pub fn bin_claims(profile: &[f64], m: usize, k: usize, mode: BinMode) -> Vec<usize> {
    let lo = profile.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins: Vec<usize> = profile.iter().map(|&d| profile_bin(d, lo, hi, k)).collect();
    let n = profile.len() + m - 1;
    let last = profile.len() - 1;
    (0..n)
        .map(|t| {
            let covering = &bins[t.saturating_sub(m - 1)..=t.min(last)];
            match mode {
                BinMode::Min => *covering.iter().min().unwrap(),
                BinMode::Max => *covering.iter().max().unwrap(),
            }
        })
        .collect()
}

pub fn segment_bins(sample: &Sample, m: usize, k: usize, mode: BinMode) -> Result<SegmentMap, SegmentError> {
    if k < 2 {
        return Err(SegmentError::InvalidK {
            k,
            reason: "at least two bins are required".into(),
        });
    }
    segment_columns(sample, |column| {
        let mp = compute_matrix_profile(column, m)?;
        Ok(super::run_lengths(&bin_claims(mp.distances(), m, k, mode)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_picks_largest_jumps() {
        let mp = [1.0, 1.0, 4.0, 4.1, 0.5, 0.5];
        // scores: 0, 3, 0.1, 3.6, 0 -> top two at indices 3 and 1
        assert_eq!(slope_borders(&mp, 2, SlopeVariant::Gradient), vec![1, 3]);
        assert_eq!(slope_borders(&mp, 1, SlopeVariant::Gradient), vec![3]);
    }

    #[test]
    fn gradient_border_at_zero_is_dropped() {
        let mp = [0.0, 5.0, 5.0, 5.0];
        assert!(slope_borders(&mp, 1, SlopeVariant::Gradient).is_empty());
    }

    #[test]
    fn sorted_maps_back_to_profile_index() {
        let mp = [3.0, 0.1, 0.2, 2.9, 0.15];
        // ascending: 1(0.1) 4(0.15) 2(0.2) 3(2.9) 0(3.0); largest gap lands on index 3
        assert_eq!(slope_borders(&mp, 1, SlopeVariant::Sorted), vec![3]);
    }

    #[test]
    fn rejects_large_k() {
        let s = Sample::from_flat(10, 1, (0..10).map(f64::from).collect()).unwrap();
        assert!(matches!(
            segment_slopes(&s, 3, 8, SlopeVariant::Gradient),
            Err(SegmentError::InvalidK { .. })
        ));
        assert!(segment_slopes(&s, 3, 7, SlopeVariant::Gradient).is_ok());
        assert!(matches!(segment_bins(&s, 3, 1, BinMode::Min), Err(SegmentError::InvalidK { .. })));
        assert!(matches!(segment_bins(&s, 6, 3, BinMode::Min), Err(SegmentError::Profile(_))));
    }

    #[test]
    fn equal_width_edges() {
        assert_eq!(equal_width_bin(10.0, 0.0, 10.0, 2), 1);
        assert_eq!(equal_width_bin(5.0, 0.0, 10.0, 2), 1);
        assert_eq!(equal_width_bin(4.999, 0.0, 10.0, 2), 0);
        assert_eq!(equal_width_bin(3.0, 3.0, 3.0, 4), 0);
    }

    #[test]
    fn flat_profile_claims_single_bin() {
        assert_eq!(bin_claims(&[0.7; 5], 3, 4, BinMode::Min), vec![0; 7]);
    }
}
