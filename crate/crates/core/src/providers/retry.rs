use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::clock::Clock;
use crate::error::ProviderError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    pub fn backoff(&self, retry: u32) -> Duration {
        self.initial_backoff.mul_f64(self.multiplier.powi(retry as i32))
    }

    /// Runs `call` until it succeeds, fails permanently, or the retry budget
    /// is spent. Only transient failures are retried; at most
    /// `1 + max_retries` attempts are made.
    pub fn run<T>(
        &self,
        clock: &dyn Clock,
        mut call: impl FnMut() -> Result<T, ProviderError>,
    ) -> Result<T, ProviderError> {
        let mut attempt = 0;
        loop {
            match call() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_transient() && attempt < self.max_retries => {
                    tracing::debug!(attempt, error = %e, "retrying provider call");
                    clock.sleep(self.backoff(attempt));
                    attempt += 1;
                }
                Err(e) if e.is_transient() => {
                    return Err(ProviderError::Exhausted {
                        attempts: attempt + 1,
                        last: Box::new(e),
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
}
