use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

pub const WINDOW: Duration = Duration::from_secs(60);

/// Time source for the rate limiter, injectable for tests.
pub trait Clock: Send + Sync {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// A clock that only moves when told to; sleeping advances it instantly.
#[derive(Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
}

impl ManualClock {
    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

/// Sliding-window limiter: at most `max` admissions in any 60 s window.
pub struct RateLimiter<C: Clock> {
    max: usize,
    clock: C,
    admitted: Mutex<VecDeque<Duration>>,
}

impl<C: Clock> RateLimiter<C> {
    pub fn new(max_per_minute: u32, clock: C) -> Self {
        RateLimiter {
            max: max_per_minute.max(1) as usize,
            clock,
            admitted: Mutex::new(VecDeque::new()),
        }
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    /// Admits a request now, or returns how long to wait before one fits.
    pub fn try_acquire(&self) -> Result<(), Duration> {
        let now = self.clock.now();
        let mut admitted = self.admitted.lock().unwrap();
        while admitted.front().is_some_and(|&t| now.saturating_sub(t) >= WINDOW) {
            admitted.pop_front();
        }
        if admitted.len() < self.max {
            admitted.push_back(now);
            Ok(())
        } else {
            let oldest = *admitted.front().expect("window is full");
            Err(oldest + WINDOW - now)
        }
    }

    /// Blocks on the clock until a request is admitted.
    pub fn acquire(&self) {
        while let Err(wait) = self.try_acquire() {
            self.clock.sleep(wait);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_window_waits_for_the_oldest() {
        let limiter = RateLimiter::new(2, ManualClock::default());
        limiter.try_acquire().unwrap();
        limiter.clock().advance(Duration::from_secs(10));
        limiter.try_acquire().unwrap();
        assert_eq!(limiter.try_acquire(), Err(Duration::from_secs(50)));
        limiter.acquire();
        assert_eq!(limiter.clock().now(), Duration::from_secs(60));
    }
}
