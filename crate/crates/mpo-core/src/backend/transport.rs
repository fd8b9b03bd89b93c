//! Transport abstraction plus the shared rate limiter.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::ChatRequest;

/// Transport failures split by whether a retry can help.
#[derive(Debug, Clone)]
pub enum TransportError {
    /// Timeouts, connection resets, 5xx responses.
    Transient(String),
    /// Misconfiguration (4xx responses, bad endpoint); never retried.
    Fatal(String),
}

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransportError::Transient(m) => write!(f, "transient: {m}"),
            TransportError::Fatal(m) => write!(f, "fatal: {m}"),
        }
    }
}

pub trait ChatTransport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Minimum-interval limiter: callers are delayed, never dropped. Safe to
/// share across evaluation workers.
pub struct RateLimiter {
    min_interval: Option<Duration>,
    last: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn per_minute(requests_per_minute: Option<u32>) -> Self {
        let min_interval = requests_per_minute
            .filter(|&rpm| rpm > 0)
            .map(|rpm| Duration::from_secs_f64(60.0 / rpm as f64));
        RateLimiter {
            min_interval,
            last: Mutex::new(None),
        }
    }

    /// Blocks until the next request slot is available.
    pub fn acquire(&self) {
        let Some(interval) = self.min_interval else {
            return;
        };
        let mut last = self.last.lock().expect("rate limiter lock");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < interval {
                std::thread::sleep(interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limiter_delays_but_never_drops() {
        let limiter = RateLimiter::per_minute(Some(6000)); // 10ms interval
        let start = Instant::now();
        for _ in 0..4 {
            limiter.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(30));
    }

    #[test]
    fn unlimited_limiter_is_free() {
        let limiter = RateLimiter::per_minute(None);
        let start = Instant::now();
        for _ in 0..1000 {
            limiter.acquire();
        }
        assert!(start.elapsed() < Duration::from_millis(100));
    }
}
