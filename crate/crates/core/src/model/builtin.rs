//! Analytic in-process forecasters with known ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{batch_shape, ModelAdapter, ModelError};
use crate::types::Sample;

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// Naive forecast: last value of the target feature.
    LastValue { target: usize },
    /// Window mean of the target feature.
    Mean { target: usize },
    /// Value `period` steps back from the forecast point.
    SeasonalNaive { period: usize, target: usize },
    /// `sum_{t,f} c[t][f] * x[t][f] + bias`, coefficients row-major.
    Linear {
        timesteps: usize,
        features: usize,
        coefficients: Vec<f64>,
        bias: f64,
    },
    /// Mean of feature 0 over timesteps `[start, end)`; blind to everything else.
    MaskedMotif { start: usize, end: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

pub fn builtin_models() -> &'static [BuiltinInfo] {
    &[
        BuiltinInfo {
            name: "last_value",
            params: "target=F",
            summary: "last observed value of the target feature",
        },
        BuiltinInfo {
            name: "mean",
            params: "target=F",
            summary: "window mean of the target feature",
        },
        BuiltinInfo {
            name: "seasonal_naive",
            params: "p=P,target=F",
            summary: "value P steps back from the forecast point",
        },
        BuiltinInfo {
            name: "linear",
            params: "coef=c0|c1|...,bias=B or seed=S",
            summary: "inner product with row-major coefficients plus bias",
        },
        BuiltinInfo {
            name: "masked_motif",
            params: "t0=A,t1=B",
            summary: "mean of feature 0 over timesteps [A, B)",
        },
    ]
}

impl Builtin {
    /// Linear model with coefficients drawn uniformly from `[0.5, 1.5)`.
    pub fn random_linear(timesteps: usize, features: usize, seed: u64, bias: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..timesteps * features).map(|_| rng.random_range(0.5..1.5)).collect();
        Builtin::Linear {
            timesteps,
            features,
            coefficients,
            bias,
        }
    }

    /// Parses `name[:key=value,...]`. `shape` sizes models that depend on the window shape.
    pub fn parse(text: &str, shape: (usize, usize)) -> Result<Self, ModelError> {
        let (name, params) = match text.split_once(':') {
            Some((n, p)) => (n.trim(), p),
            None => (text.trim(), ""),
        };
        let invalid = |reason: String| ModelError::InvalidLocator {
            locator: format!("builtin:{text}"),
            reason,
        };
        let mut kv = Vec::new();
        for part in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| invalid(format!("parameter `{part}` is not key=value")))?;
            kv.push((k.trim(), v.trim()));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let usize_param = |key: &str, default: Option<usize>| -> Result<usize, ModelError> {
            match get(key) {
                Some(v) => v.parse().map_err(|_| invalid(format!("`{key}` must be a non-negative integer"))),
                None => default.ok_or_else(|| invalid(format!("missing parameter `{key}`"))),
            }
        };
        let f64_param = |key: &str, default: f64| -> Result<f64, ModelError> {
            match get(key) {
                Some(v) => v.parse().map_err(|_| invalid(format!("`{key}` must be a number"))),
                None => Ok(default),
            }
        };
        let (timesteps, features) = shape;
        let model = match name {
            "last_value" => Builtin::LastValue {
                target: usize_param("target", Some(0))?,
            },
            "mean" => Builtin::Mean {
                target: usize_param("target", Some(0))?,
            },
            "seasonal_naive" => Builtin::SeasonalNaive {
                period: usize_param("p", None)?,
                target: usize_param("target", Some(0))?,
            },
            "linear" => {
                let bias = f64_param("bias", 0.0)?;
                match get("coef") {
                    Some(list) => {
                        let coefficients = list
                            .split('|')
                            .map(|c| c.trim().parse::<f64>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|_| invalid("`coef` must be `|`-separated numbers".into()))?;
                        if coefficients.len() != timesteps * features {
                            return Err(invalid(format!(
                                "{} coefficients given for a {timesteps}x{features} window",
                                coefficients.len()
                            )));
                        }
                        Builtin::Linear {
                            timesteps,
                            features,
                            coefficients,
                            bias,
                        }
                    }
                    None => Builtin::random_linear(timesteps, features, usize_param("seed", Some(0))? as u64, bias),
                }
            }
            "masked_motif" => Builtin::MaskedMotif {
                start: usize_param("t0", None)?,
                end: usize_param("t1", None)?,
            },
            other => return Err(ModelError::UnknownModel(other.to_string())),
        };
        model.check_shape(shape)?;
        Ok(model)
    }

    fn check_shape(&self, (timesteps, features): (usize, usize)) -> Result<(), ModelError> {
        let bad = |expected| ModelError::ShapeMismatch {
            expected,
            found: (timesteps, features),
        };
        match *self {
            Builtin::LastValue { target } | Builtin::Mean { target } if target >= features => {
                Err(bad((timesteps, target + 1)))
            }
            Builtin::SeasonalNaive { period, target } if period == 0 || period > timesteps || target >= features => {
                Err(bad((period.max(1), target + 1)))
            }
            Builtin::Linear {
                timesteps: t,
                features: f,
                ..
            } if (t, f) != (timesteps, features) => Err(bad((t, f))),
            Builtin::MaskedMotif { start, end } if start >= end || end > timesteps => Err(bad((end, 1))),
            _ => Ok(()),
        }
    }

    pub fn predict_one(&self, x: &Sample) -> Result<f64, ModelError> {
        self.check_shape(x.shape())?;
        let t = x.timesteps();
        Ok(match self {
            Builtin::LastValue { target } => x.get(t - 1, *target),
            Builtin::Mean { target } => (0..t).map(|i| x.get(i, *target)).sum::<f64>() / t as f64,
            Builtin::SeasonalNaive { period, target } => x.get(t - period, *target),
            Builtin::Linear { coefficients, bias, .. } => {
                coefficients.iter().zip(x.as_slice()).map(|(c, v)| c * v).sum::<f64>() + bias
            }
            Builtin::MaskedMotif { start, end } => {
                (*start..*end).map(|i| x.get(i, 0)).sum::<f64>() / (end - start) as f64
            }
        })
    }
}

impl ModelAdapter for Builtin {
    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<f64>, ModelError> {
        batch_shape(batch)?;
        batch.iter().map(|s| self.predict_one(s)).collect()
    }

    fn describe(&self) -> String {
        match self {
            Builtin::LastValue { target } => format!("builtin:last_value:target={target}"),
            Builtin::Mean { target } => format!("builtin:mean:target={target}"),
            Builtin::SeasonalNaive { period, target } => format!("builtin:seasonal_naive:p={period},target={target}"),
            Builtin::Linear { bias, .. } => format!("builtin:linear:bias={bias}"),
            Builtin::MaskedMotif { start, end } => format!("builtin:masked_motif:t0={start},t1={end}"),
        }
    }
}
