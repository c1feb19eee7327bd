use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use super::clock::Clock;

const WINDOW: Duration = Duration::from_secs(60);

/// Admits at most `per_minute` requests in any 60-second window.
///
/// Keeps the admission times of the last `per_minute` requests; a new
/// request waits until the oldest of them is a full window old.
pub struct RateLimiter {
    per_minute: usize,
    admitted: Mutex<VecDeque<Duration>>,
    clock: Arc<dyn Clock>,
}

impl RateLimiter {
    pub fn new(per_minute: u32, clock: Arc<dyn Clock>) -> Self {
        Self {
            per_minute: per_minute.max(1) as usize,
            admitted: Mutex::new(VecDeque::new()),
            clock,
        }
    }

    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut admitted = self.admitted.lock().unwrap();
                let now = self.clock.now();
                while admitted.front().is_some_and(|&t| now.saturating_sub(t) >= WINDOW) {
                    admitted.pop_front();
                }
                if admitted.len() < self.per_minute {
                    admitted.push_back(now);
                    return;
                }
                WINDOW - now.saturating_sub(admitted[0])
            };
            self.clock.sleep(wait);
        }
    }
}

/// Caps the number of requests in flight at once.
pub struct ConcurrencyGate {
    limit: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

pub struct GatePermit<'a> {
    gate: &'a ConcurrencyGate,
}

impl ConcurrencyGate {
    pub fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn enter(&self) -> GatePermit<'_> {
        let mut n = self.in_flight.lock().unwrap();
        while *n >= self.limit {
            n = self.freed.wait(n).unwrap();
        }
        *n += 1;
        GatePermit { gate: self }
    }
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        *self.gate.in_flight.lock().unwrap() -= 1;
        self.gate.freed.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::clock::VirtualClock;

    fn max_in_any_window(times: &[Duration]) -> usize {
        times
            .iter()
            .map(|&start| times.iter().filter(|&&t| t >= start && t < start + WINDOW).count())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn no_window_exceeds_the_limit() {
        let clock = Arc::new(VirtualClock::new());
        let limiter = RateLimiter::new(7, clock.clone());
        let mut times = Vec::new();
        for i in 0..50 {
            // irregular arrivals, sometimes bursty
            if i % 5 == 0 {
                clock.advance(Duration::from_millis(13_700));
            }
            limiter.acquire();
            times.push(clock.now());
        }
        assert!(max_in_any_window(&times) <= 7);
        // bursts are admitted immediately up to the limit
        assert_eq!(times[0], times[4]);
    }

    #[test]
    fn waits_exactly_until_the_oldest_request_expires() {
        let clock = Arc::new(VirtualClock::new());
        let limiter = RateLimiter::new(2, clock.clone());
        limiter.acquire();
        clock.advance(Duration::from_secs(10));
        limiter.acquire();
        limiter.acquire();
        assert_eq!(clock.now(), Duration::from_secs(60));
        assert_eq!(clock.sleeps(), vec![Duration::from_secs(50)]);
    }

    #[test]
    fn gate_limits_parallelism() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let gate = Arc::new(ConcurrencyGate::new(2));
        let live = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (gate, live, peak) = (gate.clone(), live.clone(), peak.clone());
                std::thread::spawn(move || {
                    let _p = gate.enter();
                    let n = live.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(n, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    live.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
