//! Segmentation of a sample into temporally contiguous interpretable components.
//!
//! Each feature column is segmented independently; segment ids are unique across
//! the whole sample and assigned feature-major (see [`SegmentMap::from_runs`]).

mod matrix;
mod sax;
mod windows;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix_profile::ProfileError;
use crate::types::{Sample, SegmentMap, SegmentMapError};

pub use matrix::{bin_claims, segment_bins, segment_slopes, slope_borders};
pub use sax::{run_lengths, sax_band, sax_run_counts, sax_transform, segment_sax};
pub use windows::{exponential_lengths, segment_exponential, segment_uniform};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("window size {m} invalid for {timesteps} timesteps")]
    InvalidWindow { m: usize, timesteps: usize },
    #[error("partition count {k} invalid; {reason}")]
    InvalidK { k: usize, reason: String },
    #[error("number of SAX bins must be at least 2, got {0}")]
    InvalidBins(usize),
    #[error("sample has {timesteps} timesteps, at least {required} required")]
    TooShort { timesteps: usize, required: usize },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Map(#[from] SegmentMapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Uniform,
    Exponential,
    Slopes,
    BinsMin,
    BinsMax,
    Sax,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Uniform,
        Algorithm::Exponential,
        Algorithm::Slopes,
        Algorithm::BinsMin,
        Algorithm::BinsMax,
        Algorithm::Sax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Uniform => "uniform",
            Algorithm::Exponential => "exponential",
            Algorithm::Slopes => "slopes",
            Algorithm::BinsMin => "bins-min",
            Algorithm::BinsMax => "bins-max",
            Algorithm::Sax => "sax",
        }
    }

    /// Human-facing row label, e.g. for result tables.
    pub fn title(self) -> &'static str {
        match self {
            Algorithm::Uniform => "Uniform",
            Algorithm::Exponential => "Exponential",
            Algorithm::Slopes => "Slopes",
            Algorithm::BinsMin => "Bins Min",
            Algorithm::BinsMax => "Bins Max",
            Algorithm::Sax => "SAX",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| format!("unknown segmentation algorithm `{s}`"))
    }
}

/// How the slopes segmenter scores candidate borders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeVariant {
    /// Absolute forward difference of the profile.
    #[default]
    Gradient,
    /// Successive differences of the ascending-sorted profile.
    Sorted,
}

impl FromStr for SlopeVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gradient" => Ok(SlopeVariant::Gradient),
            "sorted" => Ok(SlopeVariant::Sorted),
            _ => Err(format!("unknown slope variant `{s}`")),
        }
    }
}

impl fmt::Display for SlopeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlopeVariant::Gradient => "gradient",
            SlopeVariant::Sorted => "sorted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinMode {
    Min,
    Max,
}

pub const DEFAULT_PARTITIONS: usize = 8;

pub fn default_window_size(timesteps: usize) -> usize {
    (timesteps / 8).max(2)
}

/// Algorithm choice plus parameters. Unset parameters resolve to defaults
/// derived from the sample length at segmentation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmenterConfig {
    pub algorithm: Algorithm,
    pub window_size: Option<usize>,
    pub partitions: Option<usize>,
    #[serde(default)]
    pub slope_variant: SlopeVariant,
}

impl SegmenterConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SegmenterConfig {
            algorithm,
            window_size: None,
            partitions: None,
            slope_variant: SlopeVariant::Gradient,
        }
    }

    pub fn with_window_size(mut self, m: usize) -> Self {
        self.window_size = Some(m);
        self
    }

    pub fn with_partitions(mut self, k: usize) -> Self {
        self.partitions = Some(k);
        self
    }

    pub fn with_slope_variant(mut self, variant: SlopeVariant) -> Self {
        self.slope_variant = variant;
        self
    }

    pub fn resolved_window_size(&self, timesteps: usize) -> usize {
        self.window_size.unwrap_or_else(|| default_window_size(timesteps))
    }

    pub fn resolved_partitions(&self) -> usize {
        self.partitions.unwrap_or(DEFAULT_PARTITIONS)
    }

    pub fn segment(&self, sample: &Sample) -> Result<SegmentMap, SegmentError> {
        let m = self.resolved_window_size(sample.timesteps());
        let k = self.resolved_partitions();
        match self.algorithm {
            Algorithm::Uniform => segment_uniform(sample, m),
            Algorithm::Exponential => segment_exponential(sample),
            Algorithm::Slopes => segment_slopes(sample, m, k, self.slope_variant),
            Algorithm::BinsMin => segment_bins(sample, m, k, BinMode::Min),
            Algorithm::BinsMax => segment_bins(sample, m, k, BinMode::Max),
            Algorithm::Sax => segment_sax(sample, k),
        }
    }
}

/// Runs `per_feature` on every column and stitches the run lengths into one map.
fn segment_columns<F>(sample: &Sample, mut per_feature: F) -> Result<SegmentMap, SegmentError>
where
    F: FnMut(&[f64]) -> Result<Vec<usize>, SegmentError>,
{
    let runs = (0..sample.features())
        .map(|f| per_feature(&sample.column(f)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SegmentMap::from_runs(sample.timesteps(), &runs)?)
}

/// Converts sorted, deduplicated border positions in `(0, n)` to run lengths.
fn borders_to_runs(n: usize, borders: &[usize]) -> Vec<usize> {
    let mut runs = Vec::with_capacity(borders.len() + 1);
    let mut start = 0;
    for &b in borders {
        debug_assert!(b > start && b < n);
        runs.push(b - start);
        start = b;
    }
    runs.push(n - start);
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("bins_min".parse::<Algorithm>().unwrap(), Algorithm::BinsMin);
        assert!("shapelet".parse::<Algorithm>().is_err());
    }

    #[test]
    fn defaults_follow_length() {
        assert_eq!(default_window_size(24), 3);
        assert_eq!(default_window_size(72), 9);
        assert_eq!(default_window_size(10), 2);
    }

    #[test]
    fn borders_to_runs_covers() {
        assert_eq!(borders_to_runs(10, &[3, 7]), vec![3, 4, 3]);
        assert_eq!(borders_to_runs(5, &[]), vec![5]);
    }
}
