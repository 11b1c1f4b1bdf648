use std::sync::{Condvar, Mutex};

use super::{ModelAdapter, ModelError};
use crate::types::Sample;

/// Wraps an adapter so that at most `max_in_flight()` calls run at once.
pub struct InFlightLimit<'a> {
    inner: &'a dyn ModelAdapter,
    permits: Mutex<usize>,
    freed: Condvar,
}

impl<'a> InFlightLimit<'a> {
    pub fn new(inner: &'a dyn ModelAdapter) -> Self {
        InFlightLimit {
            inner,
            permits: Mutex::new(inner.max_in_flight().max(1)),
            freed: Condvar::new(),
        }
    }
}

struct Permit<'l, 'a>(&'l InFlightLimit<'a>);

impl Drop for Permit<'_, '_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap_or_else(|p| p.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

impl ModelAdapter for InFlightLimit<'_> {
    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<f64>, ModelError> {
        let _permit = {
            let mut free = self.permits.lock().unwrap_or_else(|p| p.into_inner());
            while *free == 0 {
                free = self.freed.wait(free).unwrap_or_else(|p| p.into_inner());
            }
            *free -= 1;
            Permit(self)
        };
        self.inner.predict_batch(batch)
    }

    fn max_in_flight(&self) -> usize {
        self.inner.max_in_flight()
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}
