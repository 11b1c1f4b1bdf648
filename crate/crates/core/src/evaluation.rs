//! Perturbation analysis: does destroying the cells an explanation calls
//! relevant hurt the forecast more than destroying the same number of random
//! cells?
//!
//! For every window the attribution is min-max scaled (on absolute values),
//! thresholded at a percentile, and the selected cells are replaced. A random
//! cell set of the same size is replaced for the baseline. With `orig`, `pert`
//! and `rand` the three mean squared errors,
//!
//! ```text
//! pert_c = (pert - orig) / orig
//! rand_c = (rand - orig) / orig
//! score  = |pert_c| / |rand_c|
//! ```
//!
//! and a score above one means the explanation beats random guessing.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explainer::{explain, ExplainConfig, ExplainError};
use crate::model::{InFlightLimit, ModelAdapter, ModelError};
use crate::replacement::{ReplaceError, ReplacementKind, Replacer};
use crate::segmentation::{Algorithm, SegmenterConfig};
use crate::types::{Attribution, Cell, Dataset};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("percentile {0} outside the allowed range")]
    InvalidPercentile(f64),
    #[error("cannot draw {count} cells from a {timesteps}x{features} window")]
    CountTooLarge {
        count: usize,
        timesteps: usize,
        features: usize,
    },
    #[error("{predictions} predictions vs {targets} targets")]
    LengthMismatch { predictions: usize, targets: usize },
    #[error("explaining window {window}: {source}")]
    Explain {
        window: usize,
        #[source]
        source: ExplainError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Replace(#[from] ReplaceError),
    #[error("invalid evaluation configuration: {0}")]
    InvalidConfig(String),
}

/// Cells selected by thresholding one attribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholded {
    pub cells: BTreeSet<Cell>,
    /// All weights equal: nothing stands out, so nothing is selected.
    pub degenerate: bool,
}

/// Linear-interpolation (type 7) percentile of ascending-sorted values.
pub fn percentile_sorted(sorted: &[f64], percentile: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * percentile / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Weight spreads at or below this fraction of the surrogate's output scale are
/// solver round-off, not structure.
pub const DEGENERATE_SPREAD: f64 = 1e-12;

/// Selects the cells whose min-max scaled absolute weight reaches the given
/// percentile of all scaled weights. The maximum cell always qualifies.
pub fn threshold_cells(attribution: &Attribution, percentile: f64) -> Result<Thresholded, EvalError> {
    if !(0.0..=100.0).contains(&percentile) {
        return Err(EvalError::InvalidPercentile(percentile));
    }
    let magnitudes: Vec<f64> = attribution.weights().iter().map(|w| w.abs()).collect();
    let lo = magnitudes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = magnitudes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = attribution.intercept().abs() + attribution.segment_coefficients().iter().map(|c| c.abs()).sum::<f64>();
    if !(hi - lo > DEGENERATE_SPREAD * scale) {
        return Ok(Thresholded {
            cells: BTreeSet::new(),
            degenerate: true,
        });
    }
    let scaled: Vec<f64> = magnitudes.iter().map(|m| (m - lo) / (hi - lo)).collect();
    let mut sorted = scaled.clone();
    sorted.sort_by(f64::total_cmp);
    let threshold = percentile_sorted(&sorted, percentile).min(*sorted.last().unwrap());
    let features = attribution.shape().1;
    let cells = scaled
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= threshold)
        .map(|(i, _)| Cell::new(i / features, i % features))
        .collect();
    Ok(Thresholded {
        cells,
        degenerate: false,
    })
}

/// `count` distinct cells drawn uniformly without replacement.
pub fn random_cells(timesteps: usize, features: usize, count: usize, seed: u64) -> Result<BTreeSet<Cell>, EvalError> {
    let total = timesteps * features;
    if count > total {
        return Err(EvalError::CountTooLarge {
            count,
            timesteps,
            features,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, total, count)
        .into_iter()
        .map(|i| Cell::new(i / features, i % features))
        .collect())
}

/// Mean squared error.
pub fn quality_metric(predictions: &[f64], targets: &[f64]) -> Result<f64, EvalError> {
    if predictions.len() != targets.len() || predictions.is_empty() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            targets: targets.len(),
        });
    }
    Ok(predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / predictions.len() as f64)
}

/// SplitMix64 finalizer over a base seed and two stream indices.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub percentile: f64,
    pub replacement: ReplacementKind,
    pub rng_seed: u64,
    pub segmenter: SegmenterConfig,
    pub explain: ExplainConfig,
    /// Random cell sets drawn per window for the baseline arm.
    pub random_repeats: usize,
    /// Reuse the informed cell set for the baseline arm (sanity check: score 1).
    pub mirror_baseline: bool,
}

impl EvalConfig {
    pub fn new(segmenter: SegmenterConfig) -> Self {
        EvalConfig {
            percentile: 90.0,
            replacement: ReplacementKind::Zero,
            rng_seed: 0,
            segmenter,
            explain: ExplainConfig::default(),
            random_repeats: 5,
            mirror_baseline: false,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.segmenter.algorithm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisionHazard {
    /// Unperturbed MSE is zero, so relative changes are undefined.
    ZeroOriginalError,
    /// Random perturbation did not change the MSE.
    ZeroRandomChange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub index: usize,
    pub target: f64,
    pub original: f64,
    pub perturbed: f64,
    /// Mean over baseline repeats of the squared error.
    pub random_squared_error: f64,
    pub cells: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mse_orig: f64,
    pub mse_pert: f64,
    pub mse_rand: f64,
    pub pert_c: Option<f64>,
    pub rand_c: Option<f64>,
    pub score: Option<f64>,
    pub hazard: Option<DivisionHazard>,
    pub degenerate_count: usize,
    pub windows: Vec<WindowRecord>,
}

/// Relative changes and score from the three MSEs.
pub fn fidelity_score(
    mse_orig: f64,
    mse_pert: f64,
    mse_rand: f64,
) -> (Option<f64>, Option<f64>, Option<f64>, Option<DivisionHazard>) {
    if mse_orig == 0.0 {
        return (None, None, None, Some(DivisionHazard::ZeroOriginalError));
    }
    let pert_c = (mse_pert - mse_orig) / mse_orig;
    let rand_c = (mse_rand - mse_orig) / mse_orig;
    if rand_c == 0.0 {
        return (Some(pert_c), Some(rand_c), None, Some(DivisionHazard::ZeroRandomChange));
    }
    (Some(pert_c), Some(rand_c), Some(pert_c.abs() / rand_c.abs()), None)
}

fn evaluate_window(
    dataset: &Dataset,
    index: usize,
    model: &dyn ModelAdapter,
    config: &EvalConfig,
) -> Result<WindowRecord, EvalError> {
    let (sample, target) = dataset.window(index);
    let explain_config = ExplainConfig {
        rng_seed: derive_seed(config.explain.rng_seed, index as u64, 0),
        ..config.explain.clone()
    };
    let attribution = explain(&sample, &config.segmenter, model, &explain_config)
        .map_err(|source| EvalError::Explain { window: index, source })?;
    let selected = threshold_cells(&attribution, config.percentile)?;

    let replacer = Replacer::new(&sample, config.replacement);
    let perturbed = replacer.perturb_cells(&sample, &selected.cells)?;
    let (timesteps, features) = sample.shape();
    let mut batch = vec![sample.clone(), perturbed];
    if config.mirror_baseline {
        batch.push(batch[1].clone());
    } else {
        for r in 0..config.random_repeats {
            let seed = derive_seed(config.rng_seed, index as u64, r as u64 + 1);
            let cells = random_cells(timesteps, features, selected.cells.len(), seed)?;
            batch.push(replacer.perturb_cells(&sample, &cells)?);
        }
    }
    let out = model.predict_batch(&batch)?;
    if out.len() != batch.len() {
        return Err(ModelError::PredictionFailure(format!(
            "model returned {} predictions for {} windows",
            out.len(),
            batch.len()
        ))
        .into());
    }
    let random = &out[2..];
    let random_squared_error = random.iter().map(|p| (p - target).powi(2)).sum::<f64>() / random.len() as f64;
    Ok(WindowRecord {
        index,
        target,
        original: out[0],
        perturbed: out[1],
        random_squared_error,
        cells: selected.cells.len(),
        degenerate: selected.degenerate,
    })
}

/// Runs the full analysis over every window of `dataset`. Windows are processed
/// in parallel on the current rayon pool while model calls respect the
/// adapter's concurrency limit; results do not depend on scheduling.
pub fn run_perturbation_analysis(
    dataset: &Dataset,
    model: &dyn ModelAdapter,
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    if !(config.percentile > 0.0 && config.percentile < 100.0) {
        return Err(EvalError::InvalidPercentile(config.percentile));
    }
    if !config.mirror_baseline && config.random_repeats == 0 {
        return Err(EvalError::InvalidConfig("at least one random repeat is required".into()));
    }
    let gate = InFlightLimit::new(model);
    let windows = (0..dataset.num_windows())
        .into_par_iter()
        .map(|i| evaluate_window(dataset, i, &gate, config))
        .collect::<Result<Vec<_>, _>>()?;

    let n = windows.len() as f64;
    let mse_orig = windows.iter().map(|w| (w.original - w.target).powi(2)).sum::<f64>() / n;
    let mse_pert = windows.iter().map(|w| (w.perturbed - w.target).powi(2)).sum::<f64>() / n;
    let mse_rand = windows.iter().map(|w| w.random_squared_error).sum::<f64>() / n;
    let (pert_c, rand_c, score, hazard) = fidelity_score(mse_orig, mse_pert, mse_rand);
    Ok(EvalReport {
        mse_orig,
        mse_pert,
        mse_rand,
        pert_c,
        rand_c,
        score,
        hazard,
        degenerate_count: windows.iter().filter(|w| w.degenerate).count(),
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SegmentMap;

    fn attribution(weights: &[f64]) -> Attribution {
        let n = weights.len();
        let map = SegmentMap::from_runs(n, &[vec![1; n]]).unwrap();
        Attribution::broadcast(map, weights.to_vec(), 0.0)
    }

    #[test]
    fn percentile_interpolates() {
        let s: Vec<f64> = (0..10).map(f64::from).collect();
        assert!((percentile_sorted(&s, 90.0) - 8.1).abs() < 1e-12);
        assert_eq!(percentile_sorted(&s, 0.0), 0.0);
        assert_eq!(percentile_sorted(&s, 100.0), 9.0);
        assert_eq!(percentile_sorted(&[3.0], 50.0), 3.0);
    }

    #[test]
    fn top_decile_of_ramp() {
        let a = attribution(&(0..10).map(f64::from).collect::<Vec<_>>());
        let t = threshold_cells(&a, 90.0).unwrap();
        assert_eq!(t.cells, [Cell::new(9, 0)].into());
        assert_eq!(threshold_cells(&a, 0.0).unwrap().cells.len(), 10);
        assert!(threshold_cells(&a, 100.5).is_err());
    }

    #[test]
    fn negative_weights_count_by_magnitude() {
        let a = attribution(&[0.1, -5.0, 0.2, 0.3]);
        assert_eq!(threshold_cells(&a, 90.0).unwrap().cells, [Cell::new(1, 0)].into());
    }

    #[test]
    fn flat_attribution_is_degenerate() {
        let t = threshold_cells(&attribution(&[0.4; 6]), 90.0).unwrap();
        assert!(t.degenerate && t.cells.is_empty());
    }

    #[test]
    fn round_off_spread_is_degenerate() {
        let map = SegmentMap::from_labels(3, 1, vec![0, 1, 2]).unwrap();
        let a = Attribution::broadcast(map, vec![1e-28, -4e-28, 0.0], 3.7);
        assert!(threshold_cells(&a, 90.0).unwrap().degenerate);
    }

    #[test]
    fn random_cells_contract() {
        assert_eq!(random_cells(4, 2, 8, 1).unwrap().len(), 8);
        assert_eq!(random_cells(4, 2, 3, 9).unwrap(), random_cells(4, 2, 3, 9).unwrap());
        assert!(matches!(random_cells(4, 2, 9, 1), Err(EvalError::CountTooLarge { .. })));
    }

    #[test]
    fn mse_examples() {
        assert_eq!(quality_metric(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(quality_metric(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 5.0);
        assert!(quality_metric(&[], &[]).is_err());
        assert!(quality_metric(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn score_hazards() {
        assert_eq!(fidelity_score(0.0, 1.0, 1.0).3, Some(DivisionHazard::ZeroOriginalError));
        let (p, r, s, h) = fidelity_score(2.0, 2.0, 2.0);
        assert_eq!((p, r, s, h), (Some(0.0), Some(0.0), None, Some(DivisionHazard::ZeroRandomChange)));
        let (_, _, s, _) = fidelity_score(1.0, 4.0, 2.0);
        assert_eq!(s, Some(3.0));
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: BTreeSet<u64> = (0..100).flat_map(|a| (0..10).map(move |b| derive_seed(7, a, b))).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
