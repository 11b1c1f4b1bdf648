//! Black-box prediction boundary.
//!
//! Every model, in-process or remote, is reached through [`ModelAdapter`]: a batch
//! of equally shaped windows goes in, one forecast per window comes out in order.

mod builtin;
mod http;
mod limit;
mod process;
pub mod wire;

use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::types::Sample;

pub use builtin::{builtin_models, Builtin, BuiltinInfo};
pub use http::HttpModel;
pub use limit::InFlightLimit;
pub use process::ProcessModel;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("prediction failed: {0}")]
    PredictionFailure(String),
    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid model locator `{locator}`: {reason}")]
    InvalidLocator { locator: String, reason: String },
}

pub trait ModelAdapter: Send + Sync {
    /// One forecast per window, in input order. All windows share one shape.
    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<f64>, ModelError>;

    /// Upper bound on concurrent `predict_batch` calls this adapter tolerates.
    fn max_in_flight(&self) -> usize {
        usize::MAX
    }

    fn describe(&self) -> String;
}

impl<M: ModelAdapter + ?Sized> ModelAdapter for Box<M> {
    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<f64>, ModelError> {
        (**self).predict_batch(batch)
    }

    fn max_in_flight(&self) -> usize {
        (**self).max_in_flight()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Checks that every window in the batch has the same shape and returns it.
pub fn batch_shape(batch: &[Sample]) -> Result<Option<(usize, usize)>, ModelError> {
    let Some(first) = batch.first() else {
        return Ok(None);
    };
    let expected = first.shape();
    for s in &batch[1..] {
        if s.shape() != expected {
            return Err(ModelError::ShapeMismatch {
                expected,
                found: s.shape(),
            });
        }
    }
    Ok(Some(expected))
}

/// Parsed `builtin:<definition>`, `process:<command>` or `http:<url>` locator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelLocator {
    Builtin(String),
    Process(String),
    Http(String),
}

impl FromStr for ModelLocator {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = |reason: &str| ModelError::InvalidLocator {
            locator: s.to_string(),
            reason: reason.to_string(),
        };
        let (scheme, rest) = s.split_once(':').ok_or_else(|| invalid("expected <kind>:<definition>"))?;
        if rest.trim().is_empty() {
            return Err(invalid("empty definition"));
        }
        match scheme {
            "builtin" => Ok(ModelLocator::Builtin(rest.to_string())),
            "process" => Ok(ModelLocator::Process(rest.to_string())),
            // `http:http://host/predict` and `http://host/predict` are both accepted
            "http" | "https" => {
                let url = if rest.starts_with("//") { s.to_string() } else { rest.to_string() };
                Ok(ModelLocator::Http(url))
            }
            other => Err(invalid(&format!("unknown kind `{other}`"))),
        }
    }
}

impl ModelLocator {
    /// Instantiates the adapter. Builtins that need the window shape (e.g. a
    /// seeded linear model) are sized to `shape`.
    pub fn open(&self, shape: (usize, usize), timeout: Duration) -> Result<Box<dyn ModelAdapter>, ModelError> {
        Ok(match self {
            ModelLocator::Builtin(definition) => Box::new(Builtin::parse(definition, shape)?),
            ModelLocator::Process(cmd) => Box::new(ProcessModel::new(cmd.clone()).with_timeout(timeout)),
            ModelLocator::Http(url) => Box::new(HttpModel::new(url.clone()).with_timeout(timeout)),
        })
    }
}
