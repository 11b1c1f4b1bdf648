//! Self-join matrix profile with z-normalized Euclidean distance.
//!
//! For a series of length `n` and window `m`, entry `i` is the distance from
//! subsequence `series[i..i+m]` to its nearest neighbour outside the trivial-match
//! exclusion zone `|i - j| < ceil(m / 2)`.
//!
//! The computation is an exact all-pairs scan, `O(n^2 m)`. Window inputs here are
//! short (tens to a few thousand points) so exactness wins over the FFT-based
//! algorithms.

use thiserror::Error;

/// Below this standard deviation a subsequence is treated as flat.
pub const FLAT_STD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("window size {m} is below the minimum of 2")]
    WindowTooSmall { m: usize },
    #[error("window size {m} exceeds half the series length {n}")]
    WindowTooLarge { m: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProfile {
    distances: Vec<f64>,
    window_size: usize,
}

impl MatrixProfile {
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

pub fn exclusion_radius(m: usize) -> usize {
    m.div_ceil(2)
}

/// z-normalizes `window` into `out`. Flat windows normalize to all zeros.
fn z_normalize_into(window: &[f64], out: &mut [f64]) {
    let m = window.len() as f64;
    let mean = window.iter().sum::<f64>() / m;
    let var = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m;
    let std = var.sqrt();
    if std < FLAT_STD {
        out.fill(0.0);
    } else {
        for (o, x) in out.iter_mut().zip(window) {
            *o = (x - mean) / std;
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn compute_matrix_profile(series: &[f64], m: usize) -> Result<MatrixProfile, ProfileError> {
    let n = series.len();
    if m < 2 {
        return Err(ProfileError::WindowTooSmall { m });
    }
    if 2 * m > n {
        return Err(ProfileError::WindowTooLarge { m, n });
    }
    let count = n - m + 1;
    let mut normalized = vec![0.0; count * m];
    for i in 0..count {
        z_normalize_into(&series[i..i + m], &mut normalized[i * m..(i + 1) * m]);
    }
    let excl = exclusion_radius(m);
    let mut best = vec![f64::INFINITY; count];
    // symmetric: each admissible pair is evaluated once
    for i in 0..count {
        let a = &normalized[i * m..(i + 1) * m];
        for j in (i + excl)..count {
            let d = squared_distance(a, &normalized[j * m..(j + 1) * m]);
            if d < best[i] {
                best[i] = d;
            }
            if d < best[j] {
                best[j] = d;
            }
        }
    }
    Ok(MatrixProfile {
        distances: best.into_iter().map(f64::sqrt).collect(),
        window_size: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_windows() {
        let s = vec![0.0; 10];
        assert_eq!(compute_matrix_profile(&s, 1), Err(ProfileError::WindowTooSmall { m: 1 }));
        assert_eq!(
            compute_matrix_profile(&s, 6),
            Err(ProfileError::WindowTooLarge { m: 6, n: 10 })
        );
        assert_eq!(compute_matrix_profile(&s, 5).unwrap().len(), 6);
    }

    #[test]
    fn repeated_pattern_has_zero_at_starts() {
        let pattern = [0.3, -1.2, 2.5, 0.7, 1.1];
        let series: Vec<f64> = pattern.iter().chain(pattern.iter()).copied().collect();
        let mp = compute_matrix_profile(&series, pattern.len()).unwrap();
        assert!(mp.distances()[0] < 1e-12);
        assert!(mp.distances()[5] < 1e-12);
    }

    #[test]
    fn sine_is_self_similar() {
        let series: Vec<f64> = (0..64)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 16.0).sin())
            .collect();
        let mp = compute_matrix_profile(&series, 16).unwrap();
        assert!(mp.distances().iter().all(|&d| d <= 1e-6), "{:?}", mp.distances());
    }

    #[test]
    fn flat_windows_are_zero_vectors() {
        // flat vs flat = 0; flat vs varying = norm of the varying side = sqrt(m)
        let series = vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 5.0];
        let mp = compute_matrix_profile(&series, 2).unwrap();
        assert_eq!(mp.distances()[0], 0.0);
        let last = *mp.distances().last().unwrap();
        assert!((last - 2f64.sqrt()).abs() < 1e-12);
    }
}
