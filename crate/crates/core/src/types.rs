//! Shared domain types: samples, segment maps, masks, attributions and datasets.
//!
//! Everything here is an immutable value once constructed. Arrays are stored
//! row-major (`index = t * features + f`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("row {row} has {found} values, expected {expected}")]
    NonRectangular {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at timestep {timestep}, feature {feature}")]
    NonFiniteValue { timestep: usize, feature: usize },
    #[error("sample has {timesteps} timesteps, at least 2 required")]
    TooShort { timesteps: usize },
    #[error("sample has no features")]
    NoFeatures,
    #[error("flat buffer of length {len} does not match shape {timesteps}x{features}")]
    ShapeMismatch {
        len: usize,
        timesteps: usize,
        features: usize,
    },
}

/// One multivariate window of `timesteps x features` finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    timesteps: usize,
    features: usize,
}

/// Validates a row-per-timestep array and wraps it as a [`Sample`].
pub fn validate_sample(rows: &[Vec<f64>]) -> Result<Sample, SampleError> {
    let timesteps = rows.len();
    if timesteps < 2 {
        return Err(SampleError::TooShort { timesteps });
    }
    let features = rows[0].len();
    if features == 0 {
        return Err(SampleError::NoFeatures);
    }
    let mut values = Vec::with_capacity(timesteps * features);
    for (t, row) in rows.iter().enumerate() {
        if row.len() != features {
            return Err(SampleError::NonRectangular {
                row: t,
                expected: features,
                found: row.len(),
            });
        }
        for (f, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(SampleError::NonFiniteValue {
                    timestep: t,
                    feature: f,
                });
            }
        }
        values.extend_from_slice(row);
    }
    Ok(Sample {
        values,
        timesteps,
        features,
    })
}

impl Sample {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SampleError> {
        validate_sample(rows)
    }

    /// Builds a sample from a row-major buffer.
    pub fn from_flat(timesteps: usize, features: usize, values: Vec<f64>) -> Result<Self, SampleError> {
        if timesteps < 2 {
            return Err(SampleError::TooShort { timesteps });
        }
        if features == 0 {
            return Err(SampleError::NoFeatures);
        }
        if values.len() != timesteps * features {
            return Err(SampleError::ShapeMismatch {
                len: values.len(),
                timesteps,
                features,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SampleError::NonFiniteValue {
                timestep: i / features,
                feature: i % features,
            });
        }
        Ok(Sample {
            values,
            timesteps,
            features,
        })
    }

    /// Caller guarantees shape and finiteness (used for perturbed copies of a valid sample).
    pub(crate) fn from_flat_unchecked(timesteps: usize, features: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), timesteps * features);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Sample {
            values,
            timesteps,
            features,
        }
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.timesteps, self.features)
    }

    #[inline]
    pub fn get(&self, t: usize, f: usize) -> f64 {
        self.values[t * self.features + f]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.features..(t + 1) * self.features]
    }

    pub fn column(&self, f: usize) -> Vec<f64> {
        (0..self.timesteps).map(|t| self.get(t, f)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.features).map(<[f64]>::to_vec).collect()
    }

    /// Applies `a * x + b` to every cell.
    pub fn affine(&self, a: f64, b: f64) -> Result<Sample, SampleError> {
        Sample::from_flat(
            self.timesteps,
            self.features,
            self.values.iter().map(|v| a * v + b).collect(),
        )
    }
}

/// A (timestep, feature) coordinate inside a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub timestep: usize,
    pub feature: usize,
}

impl Cell {
    pub fn new(timestep: usize, feature: usize) -> Self {
        Cell { timestep, feature }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentMapError {
    #[error("label buffer has {len} entries, expected {expected}")]
    ShapeMismatch { len: usize, expected: usize },
    #[error("label {label} out of range for {num_segments} segments")]
    LabelOutOfRange { label: usize, num_segments: usize },
    #[error("segment {label} never occurs")]
    MissingLabel { label: usize },
    #[error("segment {label} is not a contiguous run in feature {feature}")]
    NonContiguous { label: usize, feature: usize },
    #[error("run lengths for feature {feature} sum to {sum}, expected {timesteps}")]
    BadRuns {
        feature: usize,
        sum: usize,
        timesteps: usize,
    },
}

/// Assignment of every (timestep, feature) cell to a segment id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMap {
    labels: Vec<usize>,
    timesteps: usize,
    features: usize,
    num_segments: usize,
}

impl SegmentMap {
    /// Validates an arbitrary row-major label buffer.
    pub fn from_labels(timesteps: usize, features: usize, labels: Vec<usize>) -> Result<Self, SegmentMapError> {
        let expected = timesteps * features;
        if labels.len() != expected || expected == 0 {
            return Err(SegmentMapError::ShapeMismatch {
                len: labels.len(),
                expected,
            });
        }
        let num_segments = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_segments];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(label) = seen.iter().position(|s| !s) {
            return Err(SegmentMapError::MissingLabel { label });
        }
        // within a column, a label may not reappear once its run has ended
        for f in 0..features {
            let mut closed = vec![false; num_segments];
            let mut prev: Option<usize> = None;
            for t in 0..timesteps {
                let l = labels[t * features + f];
                if prev != Some(l) {
                    if closed[l] {
                        return Err(SegmentMapError::NonContiguous { label: l, feature: f });
                    }
                    if let Some(p) = prev {
                        closed[p] = true;
                    }
                    prev = Some(l);
                }
            }
        }
        Ok(SegmentMap {
            labels,
            timesteps,
            features,
            num_segments,
        })
    }

    /// Builds a map from per-feature run lengths. Ids are assigned feature-major:
    /// feature 0's runs first, left to right, then feature 1, and so on.
    pub fn from_runs(timesteps: usize, runs: &[Vec<usize>]) -> Result<Self, SegmentMapError> {
        let features = runs.len();
        let mut labels = vec![0usize; timesteps * features];
        let mut next = 0usize;
        for (f, lengths) in runs.iter().enumerate() {
            let sum: usize = lengths.iter().sum();
            if sum != timesteps || lengths.contains(&0) {
                return Err(SegmentMapError::BadRuns {
                    feature: f,
                    sum,
                    timesteps,
                });
            }
            let mut t = 0;
            for &len in lengths {
                for _ in 0..len {
                    labels[t * features + f] = next;
                    t += 1;
                }
                next += 1;
            }
        }
        if labels.is_empty() {
            return Err(SegmentMapError::ShapeMismatch { len: 0, expected: 0 });
        }
        Ok(SegmentMap {
            labels,
            timesteps,
            features,
            num_segments: next,
        })
    }

    pub fn num_segments(&self) -> usize {
        self.num_segments
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn features(&self) -> usize {
        self.features
    }

    #[inline]
    pub fn label(&self, t: usize, f: usize) -> usize {
        self.labels[t * self.features + f]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.labels.chunks(self.features).map(<[usize]>::to_vec).collect()
    }

    /// Run lengths of the segments in column `f`, left to right.
    pub fn run_lengths(&self, f: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut prev = None;
        for t in 0..self.timesteps {
            let l = self.label(t, f);
            if prev == Some(l) {
                *out.last_mut().unwrap() += 1;
            } else {
                out.push(1);
                prev = Some(l);
            }
        }
        out
    }

    /// Timesteps `t > 0` in column `f` where a new segment starts.
    pub fn boundaries(&self, f: usize) -> Vec<usize> {
        (1..self.timesteps)
            .filter(|&t| self.label(t, f) != self.label(t - 1, f))
            .collect()
    }

    pub fn segments_in_feature(&self, f: usize) -> usize {
        self.boundaries(f).len() + 1
    }
}

/// Binary keep/replace vector over segment ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask(Vec<bool>);

impl Mask {
    pub fn new(bits: Vec<bool>) -> Self {
        Mask(bits)
    }

    pub fn ones(len: usize) -> Self {
        Mask(vec![true; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn is_kept(&self, segment: usize) -> bool {
        self.0[segment]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|b| !**b).count()
    }
}

/// Per-cell relevance produced by broadcasting surrogate coefficients over a segment map.
///
/// Positive coefficients mean the segment's presence raises the forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    weights: Vec<f64>,
    intercept: f64,
    segment_coefficients: Vec<f64>,
    segments: SegmentMap,
}

impl Attribution {
    /// Panics if `coefficients.len() != segments.num_segments()`.
    pub fn broadcast(segments: SegmentMap, coefficients: Vec<f64>, intercept: f64) -> Self {
        assert_eq!(coefficients.len(), segments.num_segments());
        let weights = segments.labels().iter().map(|&l| coefficients[l]).collect();
        Attribution {
            weights,
            intercept,
            segment_coefficients: coefficients,
            segments,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, t: usize, f: usize) -> f64 {
        self.weights[t * self.segments.features() + f]
    }

    pub fn weight_rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.segments.features()).map(<[f64]>::to_vec).collect()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn segment_coefficients(&self) -> &[f64] {
        &self.segment_coefficients
    }

    pub fn segments(&self) -> &SegmentMap {
        &self.segments
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.segments.timesteps(), self.segments.features())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("series has {rows} rows, window length {window_length} needs at least {}", window_length + 1)]
    TooFewRows { rows: usize, window_length: usize },
    #[error("target feature {target} out of range for {features} features")]
    BadTarget { target: usize, features: usize },
}

/// A full `N x F` series cut into sliding windows of length `T` with one-step targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    series: Sample,
    window_length: usize,
    target_feature: usize,
}

impl Dataset {
    pub fn new(series: Sample, window_length: usize, target_feature: usize) -> Result<Self, DatasetError> {
        if window_length < 2 {
            return Err(SampleError::TooShort {
                timesteps: window_length,
            }
            .into());
        }
        if series.timesteps() < window_length + 1 {
            return Err(DatasetError::TooFewRows {
                rows: series.timesteps(),
                window_length,
            });
        }
        if target_feature >= series.features() {
            return Err(DatasetError::BadTarget {
                target: target_feature,
                features: series.features(),
            });
        }
        Ok(Dataset {
            series,
            window_length,
            target_feature,
        })
    }

    pub fn series(&self) -> &Sample {
        &self.series
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn target_feature(&self) -> usize {
        self.target_feature
    }

    pub fn horizon(&self) -> usize {
        1
    }

    pub fn num_windows(&self) -> usize {
        self.series.timesteps() - self.window_length
    }

    /// Window `i` covers rows `[i, i + T)` and targets row `i + T`.
    pub fn window(&self, i: usize) -> (Sample, f64) {
        let f = self.series.features();
        let start = i * f;
        let end = (i + self.window_length) * f;
        let sample = Sample::from_flat_unchecked(
            self.window_length,
            f,
            self.series.as_slice()[start..end].to_vec(),
        );
        let target = self.series.get(i + self.window_length, self.target_feature);
        (sample, target)
    }

    pub fn windows(&self) -> impl ExactSizeIterator<Item = (Sample, f64)> + '_ {
        (0..self.num_windows()).map(move |i| self.window(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_well_formed() {
        let s = validate_sample(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(s.shape(), (3, 2));
        assert_eq!(s.get(2, 1), 6.0);
    }

    #[test]
    fn validate_rejects_nan() {
        let err = validate_sample(&[vec![1.0], vec![f64::NAN]]).unwrap_err();
        assert_eq!(err, SampleError::NonFiniteValue { timestep: 1, feature: 0 });
    }

    #[test]
    fn validate_rejects_ragged() {
        let err = validate_sample(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert_eq!(
            err,
            SampleError::NonRectangular {
                row: 1,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn validate_rejects_single_row() {
        assert_eq!(
            validate_sample(&[vec![1.0]]).unwrap_err(),
            SampleError::TooShort { timesteps: 1 }
        );
    }

    fn ramp(n: usize) -> Sample {
        Sample::from_flat(n, 1, (1..=n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn windows_small() {
        let ds = Dataset::new(ramp(5), 3, 0).unwrap();
        let w: Vec<_> = ds.windows().map(|(s, y)| (s.column(0), y)).collect();
        assert_eq!(w, vec![(vec![1.0, 2.0, 3.0], 4.0), (vec![2.0, 3.0, 4.0], 5.0)]);
    }

    #[test]
    fn window_counts() {
        assert_eq!(Dataset::new(ramp(25), 24, 0).unwrap().windows().count(), 1);
        assert_eq!(Dataset::new(ramp(100), 72, 0).unwrap().windows().count(), 28);
        assert!(matches!(
            Dataset::new(ramp(24), 24, 0),
            Err(DatasetError::TooFewRows { .. })
        ));
    }

    #[test]
    fn segment_map_rejects_split_run() {
        let err = SegmentMap::from_labels(4, 1, vec![0, 1, 0, 1]).unwrap_err();
        assert_eq!(err, SegmentMapError::NonContiguous { label: 0, feature: 0 });
        assert!(matches!(
            SegmentMap::from_labels(3, 1, vec![0, 0, 2]),
            Err(SegmentMapError::MissingLabel { label: 1 })
        ));
    }

    #[test]
    fn runs_assign_feature_major_ids() {
        let map = SegmentMap::from_runs(4, &[vec![1, 3], vec![2, 2]]).unwrap();
        assert_eq!(map.num_segments(), 4);
        assert_eq!(map.to_rows(), vec![vec![0, 2], vec![1, 2], vec![1, 3], vec![1, 3]]);
        assert_eq!(map.run_lengths(0), vec![1, 3]);
        assert_eq!(map.boundaries(1), vec![2]);
        assert_eq!(SegmentMap::from_labels(4, 2, map.labels().to_vec()).unwrap(), map);
    }

    #[test]
    fn broadcast_identity() {
        let map = SegmentMap::from_runs(3, &[vec![2, 1]]).unwrap();
        let a = Attribution::broadcast(map, vec![0.5, -2.0], 1.0);
        assert_eq!(a.weights(), &[0.5, 0.5, -2.0]);
    }
}
