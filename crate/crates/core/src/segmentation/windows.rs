//! Static-window segmenters: equal-width and exponentially growing windows.

use super::{segment_columns, SegmentError};
use crate::types::{Sample, SegmentMap};

/// Splits each feature into `floor(T / m)` windows of length `m`; the last
/// window also takes the `T mod m` leftover timesteps.
pub fn segment_uniform(sample: &Sample, m: usize) -> Result<SegmentMap, SegmentError> {
    let n = sample.timesteps();
    if m < 1 || m > n {
        return Err(SegmentError::InvalidWindow { m, timesteps: n });
    }
    let d = n / m;
    let mut runs = vec![m; d];
    *runs.last_mut().unwrap() += n % m;
    segment_columns(sample, |_| Ok(runs.clone()))
}

/// Window lengths `round(e^0), round(e^1), ...` while the running total plus the
/// next term stays below `n`; the last window absorbs the remainder.
pub fn exponential_lengths(n: usize) -> Vec<usize> {
    let mut lengths = Vec::new();
    let mut total = 0usize;
    let mut i = 0i32;
    loop {
        let next = f64::from(i).exp().round() as usize;
        if total + next >= n {
            break;
        }
        lengths.push(next);
        total += next;
        i += 1;
    }
    lengths.push(n - total);
    lengths
}

pub fn segment_exponential(sample: &Sample) -> Result<SegmentMap, SegmentError> {
    let n = sample.timesteps();
    if n < 3 {
        return Err(SegmentError::TooShort {
            timesteps: n,
            required: 3,
        });
    }
    let runs = exponential_lengths(n);
    segment_columns(sample, |_| Ok(runs.clone()))
}
