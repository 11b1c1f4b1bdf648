//! Non-informative replacement values for masked segments and perturbed cells.
//!
//! Statistics (mean, min, max) are taken per feature from the window being
//! explained, never from the whole dataset.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{Cell, Mask, Sample, SegmentMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplaceError {
    #[error("mask has {mask} entries but the segment map has {segments} segments")]
    LengthMismatch { mask: usize, segments: usize },
    #[error("segment map shape {map:?} does not match sample shape {sample:?}")]
    ShapeMismatch {
        map: (usize, usize),
        sample: (usize, usize),
    },
    #[error("cell ({}, {}) is out of bounds", .0.timestep, .0.feature)]
    OutOfBounds(Cell),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplacementKind {
    #[default]
    Zero,
    Inverse,
    Mean,
}

impl ReplacementKind {
    pub const ALL: [ReplacementKind; 3] = [ReplacementKind::Zero, ReplacementKind::Inverse, ReplacementKind::Mean];

    pub fn name(self) -> &'static str {
        match self {
            ReplacementKind::Zero => "zero",
            ReplacementKind::Inverse => "inverse",
            ReplacementKind::Mean => "mean",
        }
    }
}

impl fmt::Display for ReplacementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReplacementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReplacementKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown replacement strategy `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ColumnStats {
    mean: f64,
    min: f64,
    max: f64,
}

/// Replacement rule bound to the statistics of one reference window.
///
/// Binding the statistics up front means every perturbation of that window uses
/// the same replacement values, and inverse replacement stays an involution:
/// reflecting a cell twice about the same midpoint returns the original value.
#[derive(Debug, Clone, PartialEq)]
pub struct Replacer {
    kind: ReplacementKind,
    stats: Vec<ColumnStats>,
}

impl Replacer {
    pub fn new(reference: &Sample, kind: ReplacementKind) -> Self {
        let n = reference.timesteps() as f64;
        let stats = (0..reference.features())
            .map(|f| {
                let mut sum = 0.0;
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for t in 0..reference.timesteps() {
                    let v = reference.get(t, f);
                    sum += v;
                    min = min.min(v);
                    max = max.max(v);
                }
                ColumnStats { mean: sum / n, min, max }
            })
            .collect();
        Replacer { kind, stats }
    }

    pub fn kind(&self) -> ReplacementKind {
        self.kind
    }

    /// Replacement for value `x` in feature `f`.
    #[inline]
    pub fn value(&self, f: usize, x: f64) -> f64 {
        let s = &self.stats[f];
        match self.kind {
            ReplacementKind::Zero => 0.0,
            ReplacementKind::Mean => s.mean,
            ReplacementKind::Inverse => s.max + s.min - x,
        }
    }

    pub fn apply_mask(&self, sample: &Sample, segments: &SegmentMap, mask: &Mask) -> Result<Sample, ReplaceError> {
        if mask.len() != segments.num_segments() {
            return Err(ReplaceError::LengthMismatch {
                mask: mask.len(),
                segments: segments.num_segments(),
            });
        }
        let map_shape = (segments.timesteps(), segments.features());
        if map_shape != sample.shape() || self.stats.len() != sample.features() {
            return Err(ReplaceError::ShapeMismatch {
                map: map_shape,
                sample: sample.shape(),
            });
        }
        let features = sample.features();
        let values = sample
            .as_slice()
            .iter()
            .zip(segments.labels())
            .enumerate()
            .map(|(i, (&x, &label))| if mask.is_kept(label) { x } else { self.value(i % features, x) })
            .collect();
        Ok(Sample::from_flat_unchecked(sample.timesteps(), features, values))
    }

    pub fn perturb_cells(&self, sample: &Sample, cells: &BTreeSet<Cell>) -> Result<Sample, ReplaceError> {
        let (t_max, f_max) = sample.shape();
        let mut values = sample.as_slice().to_vec();
        for &cell in cells {
            if cell.timestep >= t_max || cell.feature >= f_max || cell.feature >= self.stats.len() {
                return Err(ReplaceError::OutOfBounds(cell));
            }
            let i = cell.timestep * f_max + cell.feature;
            values[i] = self.value(cell.feature, values[i]);
        }
        Ok(Sample::from_flat_unchecked(t_max, f_max, values))
    }
}

/// Replacement value for cell `(t, f)` using the sample's own column statistics.
pub fn replacement_value(sample: &Sample, t: usize, f: usize, kind: ReplacementKind) -> f64 {
    match kind {
        ReplacementKind::Zero => 0.0,
        _ => Replacer::new(sample, kind).value(f, sample.get(t, f)),
    }
}

pub fn apply_mask(
    sample: &Sample,
    segments: &SegmentMap,
    mask: &Mask,
    kind: ReplacementKind,
) -> Result<Sample, ReplaceError> {
    Replacer::new(sample, kind).apply_mask(sample, segments, mask)
}

pub fn perturb_cells(sample: &Sample, cells: &BTreeSet<Cell>, kind: ReplacementKind) -> Result<Sample, ReplaceError> {
    Replacer::new(sample, kind).perturb_cells(sample, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> Sample {
        Sample::from_flat(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn values_per_kind() {
        let s = col(&[2.0, 4.0, 6.0]);
        assert_eq!(replacement_value(&s, 1, 0, ReplacementKind::Zero), 0.0);
        for t in 0..3 {
            assert_eq!(replacement_value(&s, t, 0, ReplacementKind::Mean), 4.0);
        }
        let s = col(&[0.0, 10.0]);
        assert_eq!(replacement_value(&s, 1, 0, ReplacementKind::Inverse), 0.0);
        assert_eq!(replacement_value(&s, 0, 0, ReplacementKind::Inverse), 10.0);
    }

    #[test]
    fn mask_identity_and_zeroing() {
        let s = Sample::from_flat(4, 2, vec![1.0, -2.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.25]).unwrap();
        let map = SegmentMap::from_runs(4, &[vec![2, 2], vec![4]]).unwrap();
        for kind in ReplacementKind::ALL {
            assert_eq!(apply_mask(&s, &map, &Mask::ones(3), kind).unwrap(), s);
        }
        let off = apply_mask(&s, &map, &Mask::new(vec![false; 3]), ReplacementKind::Zero).unwrap();
        assert!(off.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_segment_mean() {
        let s = Sample::from_flat(4, 2, vec![1.0, -2.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.25]).unwrap();
        let map = SegmentMap::from_runs(4, &[vec![2, 2], vec![4]]).unwrap();
        let out = apply_mask(&s, &map, &Mask::new(vec![true, false, true]), ReplacementKind::Mean).unwrap();
        let mean0 = (1.0 + 3.5 + 5.0 + 7.0) / 4.0;
        for t in 0..4 {
            for f in 0..2 {
                let expected = if map.label(t, f) == 1 { mean0 } else { s.get(t, f) };
                assert_eq!(out.get(t, f).to_bits(), expected.to_bits());
            }
        }
    }

    #[test]
    fn mask_length_checked() {
        let s = col(&[1.0, 2.0, 3.0]);
        let map = SegmentMap::from_runs(3, &[vec![1, 2]]).unwrap();
        assert_eq!(
            apply_mask(&s, &map, &Mask::ones(3), ReplacementKind::Zero),
            Err(ReplaceError::LengthMismatch { mask: 3, segments: 2 })
        );
    }

    #[test]
    fn perturb_cells_cases() {
        let s = Sample::from_flat(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(perturb_cells(&s, &BTreeSet::new(), ReplacementKind::Mean).unwrap(), s);
        let all: BTreeSet<Cell> = (0..3).flat_map(|t| (0..2).map(move |f| Cell::new(t, f))).collect();
        let z = perturb_cells(&s, &all, ReplacementKind::Zero).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 0.0));
        let bad: BTreeSet<Cell> = [Cell::new(3, 0)].into();
        assert_eq!(
            perturb_cells(&s, &bad, ReplacementKind::Zero),
            Err(ReplaceError::OutOfBounds(Cell::new(3, 0)))
        );
    }

    #[test]
    fn inverse_twice_with_bound_stats() {
        let s = col(&[0.0, 10.0, 3.0]);
        let r = Replacer::new(&s, ReplacementKind::Inverse);
        let cells: BTreeSet<Cell> = [Cell::new(1, 0)].into();
        let once = r.perturb_cells(&s, &cells).unwrap();
        assert_eq!(once.column(0), vec![0.0, 0.0, 3.0]);
        assert_eq!(r.perturb_cells(&once, &cells).unwrap(), s);
    }
}
