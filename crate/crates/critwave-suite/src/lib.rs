//! Verdict bookkeeping for the acceptance suite in `tests/acceptance.rs`.

use std::fmt;
use std::time::{Duration, Instant};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u8,
    pub title: &'static str,
    /// Every numeric condition held.
    pub numbers_ok: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.numbers_ok && self.elapsed <= self.limit
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {}: {} [{:.2} s, limit {} s]",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }
}

/// Time `body`, which returns the numeric verdict and a detail string.
/// An `Err` counts as a failed criterion.
pub fn judge<E: fmt::Display>(
    id: u8,
    title: &'static str,
    limit_secs: u64,
    body: impl FnOnce() -> Result<(bool, String), E>,
) -> Verdict {
    let start = Instant::now();
    let (numbers_ok, detail) = match body() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Verdict { id, title, numbers_ok, detail, elapsed: start.elapsed(), limit: Duration::from_secs(limit_secs) }
}
