//! Locally weighted ridge regression on binary masks.
//!
//! Minimizes `sum_i w_i (y_i - b0 - beta . z_i)^2 + lambda |beta|^2` with the
//! intercept left unpenalized. The intercept is eliminated by centering on the
//! weighted means, which leaves a `d x d` symmetric positive (semi-)definite
//! system solved by Cholesky.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::types::Mask;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurrogateError {
    #[error("{masks} masks, {predictions} predictions and {weights} weights; lengths must match")]
    LengthMismatch {
        masks: usize,
        predictions: usize,
        weights: usize,
    },
    #[error("{rows} rows cannot determine {segments} segment coefficients; need at least {}", segments + 2)]
    TooFewRows { rows: usize, segments: usize },
    #[error("masks have inconsistent lengths")]
    RaggedMasks,
    #[error("weights must be finite and positive; predictions must be finite")]
    InvalidInput,
    #[error("normal equations are singular")]
    SingularSystem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Weighted mean squared residual.
    pub training_loss: f64,
}

/// Proximity of a mask to the all-ones mask: `exp(-D^2 / width^2)` where `D^2`
/// is the number of switched-off segments.
pub fn kernel_weight(mask: &Mask, kernel_width: f64) -> f64 {
    let d2 = mask.zero_count() as f64;
    (-d2 / (kernel_width * kernel_width)).exp()
}

pub fn default_kernel_width(num_segments: usize) -> f64 {
    0.75 * (num_segments as f64).sqrt()
}

pub fn fit_surrogate(
    masks: &[Mask],
    predictions: &[f64],
    weights: &[f64],
    ridge_strength: f64,
) -> Result<SurrogateFit, SurrogateError> {
    if masks.len() != predictions.len() || masks.len() != weights.len() {
        return Err(SurrogateError::LengthMismatch {
            masks: masks.len(),
            predictions: predictions.len(),
            weights: weights.len(),
        });
    }
    let d = masks.first().map_or(0, Mask::len);
    if masks.len() < d + 2 {
        return Err(SurrogateError::TooFewRows {
            rows: masks.len(),
            segments: d,
        });
    }
    if masks.iter().any(|m| m.len() != d) {
        return Err(SurrogateError::RaggedMasks);
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0))
        || predictions.iter().any(|y| !y.is_finite())
        || !(ridge_strength.is_finite() && ridge_strength >= 0.0)
    {
        return Err(SurrogateError::InvalidInput);
    }

    let z = |i: usize, s: usize| if masks[i].is_kept(s) { 1.0 } else { 0.0 };
    let w_sum: f64 = weights.iter().sum();
    let y_mean = weights.iter().zip(predictions).map(|(w, y)| w * y).sum::<f64>() / w_sum;
    let z_mean: Vec<f64> = (0..d)
        .map(|s| (0..masks.len()).map(|i| weights[i] * z(i, s)).sum::<f64>() / w_sum)
        .collect();

    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    let mut centered = vec![0.0; d];
    for (i, (&w, &y)) in weights.iter().zip(predictions).enumerate() {
        for s in 0..d {
            centered[s] = z(i, s) - z_mean[s];
        }
        let dy = y - y_mean;
        for a in 0..d {
            let wa = w * centered[a];
            rhs[a] += wa * dy;
            for b in a..d {
                gram[(a, b)] += wa * centered[b];
            }
        }
    }
    for a in 0..d {
        gram[(a, a)] += ridge_strength;
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }

    let coefficients: Vec<f64> = if d == 0 {
        Vec::new()
    } else {
        let scale = (0..d).map(|a| gram[(a, a)]).fold(0.0, f64::max);
        let chol = gram.cholesky().ok_or(SurrogateError::SingularSystem)?;
        let l = chol.l_dirty();
        let min_pivot = (0..d).map(|a| l[(a, a)] * l[(a, a)]).fold(f64::INFINITY, f64::min);
        if !(scale > 0.0) || min_pivot <= scale * 1e-12 {
            return Err(SurrogateError::SingularSystem);
        }
        chol.solve(&rhs).iter().copied().collect()
    };
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(SurrogateError::SingularSystem);
    }
    let intercept = y_mean - coefficients.iter().zip(&z_mean).map(|(c, m)| c * m).sum::<f64>();

    let training_loss = masks
        .iter()
        .zip(predictions)
        .zip(weights)
        .map(|((m, y), w)| {
            let fitted = intercept
                + coefficients
                    .iter()
                    .zip(m.bits())
                    .filter(|(_, &kept)| kept)
                    .map(|(c, _)| c)
                    .sum::<f64>();
            w * (y - fitted).powi(2)
        })
        .sum::<f64>()
        / w_sum;

    Ok(SurrogateFit {
        coefficients,
        intercept,
        training_loss,
    })
}
