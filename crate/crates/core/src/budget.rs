use std::time::{Duration, Instant};

/// Wall-clock budget shared by cooperating oracle calls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget { deadline: None }
    }

    pub fn from_duration(d: Duration) -> Budget {
        Budget { deadline: Instant::now().checked_add(d) }
    }

    /// Non-finite or negative inputs are clamped: `inf` is unlimited, `<= 0` is
    /// already expired.
    pub fn from_secs_f64(secs: f64) -> Budget {
        if !secs.is_finite() {
            return Budget::unlimited();
        }
        Budget::from_duration(Duration::from_secs_f64(secs.max(0.0)))
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.deadline
    }

    pub fn expired(&self) -> bool {
        matches!(self.deadline, Some(d) if Instant::now() >= d)
    }

    pub fn remaining(&self) -> Option<Duration> {
        self.deadline.map(|d| d.saturating_duration_since(Instant::now()))
    }

    /// A sub-budget of `remaining / divisor`, at least `floor`, never beyond
    /// this budget's own deadline.
    pub fn slice(&self, divisor: u32, floor: Duration) -> Budget {
        match self.remaining() {
            None => Budget::unlimited(),
            Some(rem) => {
                let share = (rem / divisor.max(1)).max(floor).min(rem);
                Budget::from_duration(share)
            }
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::unlimited()
    }
}
