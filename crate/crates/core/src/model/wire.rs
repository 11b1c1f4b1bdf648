//! Line/HTTP prediction protocol messages.
//!
//! ```text
//! request:  {"id": <u64>, "windows": [[[f0, .., fF-1] x T] x B]}
//! response: {"id": <u64>, "predictions": [B doubles]}
//!       or: {"id": <u64>, "error": "<message>"}
//! ```
//!
//! Floats are written in shortest round-trip form, so values survive the trip
//! bit for bit.

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::types::Sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub id: u64,
    pub windows: Vec<Vec<Vec<f64>>>,
}

impl PredictRequest {
    pub fn new(id: u64, batch: &[Sample]) -> Self {
        PredictRequest {
            id,
            windows: batch.iter().map(Sample::to_rows).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictResponse {
    /// Validates a response against the request it answers.
    pub fn into_predictions(self, expected_id: u64, batch_len: usize) -> Result<Vec<f64>, ModelError> {
        if self.id != Some(expected_id) {
            return Err(ModelError::PredictionFailure(format!(
                "response id {:?} does not match request id {expected_id}",
                self.id
            )));
        }
        if let Some(message) = self.error {
            return Err(ModelError::PredictionFailure(format!("model reported: {message}")));
        }
        let predictions = self
            .predictions
            .ok_or_else(|| ModelError::PredictionFailure("response has neither predictions nor error".into()))?;
        if predictions.len() != batch_len {
            return Err(ModelError::PredictionFailure(format!(
                "expected {batch_len} predictions, got {}",
                predictions.len()
            )));
        }
        Ok(predictions)
    }
}

pub fn encode_request(id: u64, batch: &[Sample]) -> String {
    serde_json::to_string(&PredictRequest::new(id, batch)).expect("finite floats always serialize")
}

pub fn decode_response(line: &str) -> Result<PredictResponse, ModelError> {
    serde_json::from_str(line.trim())
        .map_err(|e| ModelError::PredictionFailure(format!("malformed response `{}`: {e}", line.trim())))
}
