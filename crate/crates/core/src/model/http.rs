//! Model behind an HTTP endpoint accepting `POST /predict`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use super::wire::{PredictRequest, PredictResponse};
use super::{batch_shape, ModelAdapter, ModelError, DEFAULT_TIMEOUT};
use crate::types::Sample;

pub const DEFAULT_HTTP_IN_FLIGHT: usize = 4;

pub struct HttpModel {
    url: String,
    agent: ureq::Agent,
    timeout: Duration,
    max_in_flight: usize,
    next_id: AtomicU64,
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

/// Appends `/predict` when the URL has no path.
fn endpoint(url: &str) -> String {
    let after_scheme = url.split_once("://").map_or(url, |(_, rest)| rest);
    if after_scheme.trim_end_matches('/').contains('/') {
        url.to_string()
    } else {
        format!("{}/predict", url.trim_end_matches('/'))
    }
}

impl HttpModel {
    pub fn new(url: impl Into<String>) -> Self {
        HttpModel {
            url: endpoint(&url.into()),
            agent: agent(DEFAULT_TIMEOUT),
            timeout: DEFAULT_TIMEOUT,
            max_in_flight: DEFAULT_HTTP_IN_FLIGHT,
            next_id: AtomicU64::new(1),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self.agent = agent(timeout);
        self
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl ModelAdapter for HttpModel {
    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<f64>, ModelError> {
        if batch_shape(batch)?.is_none() {
            return Ok(Vec::new());
        }
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let failure = |what: String| ModelError::PredictionFailure(format!("POST {}: {what}", self.url));
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(PredictRequest::new(id, batch))
            .map_err(|e| failure(e.to_string()))?;
        let status = response.status();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| failure(format!("reading body: {e}")))?;
        if !status.is_success() {
            // the server may still have sent a protocol error object
            if let Ok(PredictResponse { error: Some(msg), .. }) = serde_json::from_str(&body) {
                return Err(failure(format!("HTTP {status}: {msg}")));
            }
            return Err(failure(format!("HTTP {status}: {}", body.trim())));
        }
        let parsed: PredictResponse =
            serde_json::from_str(&body).map_err(|e| failure(format!("malformed response: {e}")))?;
        parsed.into_predictions(id, batch.len())
    }

    fn max_in_flight(&self) -> usize {
        self.max_in_flight
    }

    fn describe(&self) -> String {
        format!("http:{}", self.url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_defaults_to_predict() {
        assert_eq!(endpoint("http://localhost:8000"), "http://localhost:8000/predict");
        assert_eq!(endpoint("http://localhost:8000/"), "http://localhost:8000/predict");
        assert_eq!(endpoint("http://h:1/v1/predict"), "http://h:1/v1/predict");
    }

    #[test]
    fn unreachable_host_is_prediction_failure() {
        let m = HttpModel::new("http://127.0.0.1:1").with_timeout(Duration::from_secs(2));
        let s = Sample::from_flat(2, 1, vec![1.0, 2.0]).unwrap();
        assert!(matches!(m.predict_batch(&[s]), Err(ModelError::PredictionFailure(_))));
    }
}
