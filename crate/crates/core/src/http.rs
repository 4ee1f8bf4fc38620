//! Blocking JSON-over-HTTP plumbing shared by the LLM and metric clients.

use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Maximum attempts for a transient transport failure.
pub const MAX_ATTEMPTS: u32 = 3;

/// Exponential backoff between transport retries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: MAX_ATTEMPTS,
            base_delay_ms: 250,
        }
    }
}

impl RetryPolicy {
    pub fn effective_attempts(&self) -> u32 {
        self.attempts.clamp(1, MAX_ATTEMPTS)
    }

    /// Delay slept after failed attempt `attempt` (1-based).
    pub fn delay_after(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1 << (attempt - 1).min(16)))
    }

    /// Upper bound on the sleep time added by retries.
    pub fn max_added_latency(&self) -> Duration {
        (1..self.effective_attempts()).map(|a| self.delay_after(a)).sum()
    }

    /// Runs `op` until it succeeds, returns a non-retryable error, or the
    /// attempt budget is spent.
    pub fn run<T, E>(
        &self,
        mut op: impl FnMut(u32) -> Result<T, E>,
        retryable: impl Fn(&E) -> bool,
    ) -> Result<T, E> {
        let attempts = self.effective_attempts();
        let mut attempt = 1;
        loop {
            match op(attempt) {
                Ok(v) => return Ok(v),
                Err(e) if attempt < attempts && retryable(&e) => {
                    thread::sleep(self.delay_after(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Caps the number of HTTP requests in flight across all clients sharing it.
#[derive(Debug)]
pub struct InFlightLimiter {
    max: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

pub struct InFlightPermit<'a> {
    limiter: &'a InFlightLimiter,
}

impl InFlightLimiter {
    pub fn new(max: usize) -> Self {
        InFlightLimiter {
            max: max.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn max(&self) -> usize {
        self.max
    }

    pub fn acquire(&self) -> InFlightPermit<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.max {
            active = self.freed.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        InFlightPermit { limiter: self }
    }
}

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        let mut active = self.limiter.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.limiter.freed.notify_one();
    }
}

#[derive(Debug)]
pub(crate) enum TransportError {
    /// Connection, DNS, timeout or socket I/O trouble; worth retrying.
    Transient(String),
    Other(String),
}

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransportError::Transient(m) | TransportError::Other(m) => f.write_str(m),
        }
    }
}

#[derive(Clone)]
pub(crate) struct JsonClient {
    agent: ureq::Agent,
    retry: RetryPolicy,
    limiter: Option<Arc<InFlightLimiter>>,
}

impl JsonClient {
    pub(crate) fn new(
        timeout: Duration,
        retry: RetryPolicy,
        limiter: Option<Arc<InFlightLimiter>>,
    ) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        JsonClient {
            agent,
            retry,
            limiter,
        }
    }

    /// POSTs `body` and returns `(status, response body)`.
    pub(crate) fn post_json<B: Serialize>(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &B,
    ) -> Result<(u16, String), TransportError> {
        let payload =
            serde_json::to_vec(body).map_err(|e| TransportError::Other(format!("encode: {e}")))?;
        self.retry.run(
            |attempt| {
                let _permit = self.limiter.as_ref().map(|l| l.acquire());
                let mut req = self
                    .agent
                    .post(url)
                    .header("Content-Type", "application/json");
                if let Some(token) = bearer {
                    req = req.header("Authorization", format!("Bearer {token}"));
                }
                let mut resp = req.send(&payload[..]).map_err(|e| {
                    log::debug!("POST {url} attempt {attempt} failed: {e}");
                    classify(e)
                })?;
                let status = resp.status().as_u16();
                let text = resp
                    .body_mut()
                    .read_to_string()
                    .map_err(classify)?;
                Ok((status, text))
            },
            |e| matches!(e, TransportError::Transient(_)),
        )
    }
}

fn classify(e: ureq::Error) -> TransportError {
    match e {
        ureq::Error::Timeout(_)
        | ureq::Error::Io(_)
        | ureq::Error::ConnectionFailed
        | ureq::Error::HostNotFound => TransportError::Transient(e.to_string()),
        other => TransportError::Other(other.to_string()),
    }
}

/// First `max` characters of a response body, for error messages.
pub(crate) fn excerpt(body: &str, max: usize) -> String {
    let mut s: String = body.chars().take(max).collect();
    if body.chars().count() > max {
        s.push('…');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn retry_stops_after_three_attempts() {
        let policy = RetryPolicy {
            attempts: 10,
            base_delay_ms: 1,
        };
        let calls = AtomicUsize::new(0);
        let r: Result<(), &str> = policy.run(
            |_| {
                calls.fetch_add(1, Ordering::SeqCst);
                Err("down")
            },
            |_| true,
        );
        assert!(r.is_err());
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn retry_skips_non_retryable() {
        let policy = RetryPolicy {
            attempts: 3,
            base_delay_ms: 1,
        };
        let mut calls = 0;
        let r: Result<(), &str> = policy.run(
            |_| {
                calls += 1;
                Err("bad request")
            },
            |_| false,
        );
        assert!(r.is_err());
        assert_eq!(calls, 1);
    }

    #[test]
    fn retry_recovers() {
        let policy = RetryPolicy {
            attempts: 3,
            base_delay_ms: 1,
        };
        let r: Result<u32, &str> = policy.run(|a| if a < 3 { Err("x") } else { Ok(a) }, |_| true);
        assert_eq!(r.unwrap(), 3);
    }

    #[test]
    fn backoff_schedule_is_bounded() {
        let policy = RetryPolicy {
            attempts: 3,
            base_delay_ms: 100,
        };
        assert_eq!(policy.delay_after(1), Duration::from_millis(100));
        assert_eq!(policy.delay_after(2), Duration::from_millis(200));
        assert_eq!(policy.max_added_latency(), Duration::from_millis(300));
    }

    #[test]
    fn limiter_caps_concurrency() {
        let limiter = Arc::new(InFlightLimiter::new(2));
        let peak = Arc::new(AtomicUsize::new(0));
        let current = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (l, p, c) = (limiter.clone(), peak.clone(), current.clone());
                thread::spawn(move || {
                    let _g = l.acquire();
                    let now = c.fetch_add(1, Ordering::SeqCst) + 1;
                    p.fetch_max(now, Ordering::SeqCst);
                    thread::sleep(Duration::from_millis(5));
                    c.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
