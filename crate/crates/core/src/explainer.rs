//! Local surrogate explanations for one forecast.
//!
//! The loop: segment the window, draw random keep/replace masks over the
//! segments, build the perturbed windows, query the model, weight each mask by
//! its closeness to the original and fit a weighted ridge model on the masks.
//! The surrogate's coefficients, broadcast back over the segment map, are the
//! attribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelAdapter, ModelError};
use crate::replacement::{ReplaceError, ReplacementKind, Replacer};
use crate::segmentation::{SegmentError, SegmenterConfig};
use crate::surrogate::{default_kernel_width, fit_surrogate, kernel_weight, SurrogateError, SurrogateFit};
use crate::types::{Attribution, Mask, Sample, SegmentMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplainError {
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Replace(#[from] ReplaceError),
    #[error("invalid explain configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub num_masks: usize,
    pub keep_probability: f64,
    /// `None` means `0.75 * sqrt(num_segments)`.
    pub kernel_width: Option<f64>,
    pub ridge_strength: f64,
    pub rng_seed: u64,
    pub replacement: ReplacementKind,
    /// Perturbed windows per model call. Does not affect results.
    pub batch_size: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            num_masks: 1000,
            keep_probability: 0.5,
            kernel_width: None,
            ridge_strength: 1.0,
            rng_seed: 0,
            replacement: ReplacementKind::Zero,
            batch_size: 250,
        }
    }
}

impl ExplainConfig {
    fn validate(&self, num_segments: usize) -> Result<(), ExplainError> {
        let bad = |m: String| Err(ExplainError::InvalidConfig(m));
        if self.num_masks < num_segments + 2 {
            return bad(format!(
                "{} masks cannot fit {num_segments} segments; need at least {}",
                self.num_masks,
                num_segments + 2
            ));
        }
        if !(self.keep_probability > 0.0 && self.keep_probability < 1.0) {
            return bad(format!("keep probability {} outside (0, 1)", self.keep_probability));
        }
        if let Some(w) = self.kernel_width {
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("kernel width {w} must be positive"));
            }
        }
        if !(self.ridge_strength.is_finite() && self.ridge_strength >= 0.0) {
            return bad(format!("ridge strength {} must be non-negative", self.ridge_strength));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        Ok(())
    }
}

/// Mask 0 is all ones; the rest keep each segment independently with
/// `keep_probability`, redrawing any mask that switches everything off.
pub fn sample_masks(num_segments: usize, num_masks: usize, keep_probability: f64, seed: u64) -> Vec<Mask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut masks = Vec::with_capacity(num_masks);
    if num_masks == 0 {
        return masks;
    }
    masks.push(Mask::ones(num_segments));
    while masks.len() < num_masks {
        let bits: Vec<bool> = (0..num_segments).map(|_| rng.random_bool(keep_probability)).collect();
        if bits.iter().any(|&b| b) {
            masks.push(Mask::new(bits));
        }
    }
    masks
}

/// Attribution together with the surrogate fit that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub attribution: Attribution,
    pub fit: SurrogateFit,
    pub kernel_width: f64,
}

pub fn explain(
    sample: &Sample,
    segmenter: &SegmenterConfig,
    model: &dyn ModelAdapter,
    config: &ExplainConfig,
) -> Result<Attribution, ExplainError> {
    explain_detailed(sample, segmenter, model, config).map(|e| e.attribution)
}

pub fn explain_detailed(
    sample: &Sample,
    segmenter: &SegmenterConfig,
    model: &dyn ModelAdapter,
    config: &ExplainConfig,
) -> Result<Explanation, ExplainError> {
    let segments = segmenter.segment(sample)?;
    explain_segments(sample, segments, model, config)
}

/// Explains `sample` over an already computed segment map.
pub fn explain_segments(
    sample: &Sample,
    segments: SegmentMap,
    model: &dyn ModelAdapter,
    config: &ExplainConfig,
) -> Result<Explanation, ExplainError> {
    let d = segments.num_segments();
    config.validate(d)?;
    let masks = sample_masks(d, config.num_masks, config.keep_probability, config.rng_seed);
    let replacer = Replacer::new(sample, config.replacement);

    let mut predictions = Vec::with_capacity(masks.len());
    for chunk in masks.chunks(config.batch_size) {
        let batch = chunk
            .iter()
            .map(|m| replacer.apply_mask(sample, &segments, m))
            .collect::<Result<Vec<_>, _>>()?;
        let out = model.predict_batch(&batch)?;
        if out.len() != batch.len() {
            return Err(ModelError::PredictionFailure(format!(
                "model returned {} predictions for {} windows",
                out.len(),
                batch.len()
            ))
            .into());
        }
        if let Some(bad) = out.iter().find(|y| !y.is_finite()) {
            return Err(ModelError::PredictionFailure(format!("model returned non-finite prediction {bad}")).into());
        }
        predictions.extend(out);
    }

    let kernel_width = config.kernel_width.unwrap_or_else(|| default_kernel_width(d));
    let weights: Vec<f64> = masks.iter().map(|m| kernel_weight(m, kernel_width)).collect();
    let fit = fit_surrogate(&masks, &predictions, &weights, config.ridge_strength)?;
    let attribution = Attribution::broadcast(segments, fit.coefficients.clone(), fit.intercept);
    Ok(Explanation {
        attribution,
        fit,
        kernel_width,
    })
}
