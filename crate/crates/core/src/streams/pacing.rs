use std::str::FromStr;
use std::time::{Duration, Instant};

/// How a loop spaces its iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PacingMode {
    /// Sleep a full period after each iteration finishes. Iterations are
    /// never closer than one period, so rates drift below nominal.
    #[default]
    Relative,
    /// Wake at `start + n * period`; a late iteration is followed by
    /// immediate catch-up iterations.
    AbsoluteDeadline,
}

impl PacingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PacingMode::Relative => "relative",
            PacingMode::AbsoluteDeadline => "absolute",
        }
    }
}

impl FromStr for PacingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relative" => Ok(PacingMode::Relative),
            "absolute" | "absolute-deadline" => Ok(PacingMode::AbsoluteDeadline),
            other => Err(format!("unknown pacing mode '{other}'")),
        }
    }
}

#[derive(Debug)]
pub struct Pacer {
    mode: PacingMode,
    period: Duration,
    start: Instant,
    ticks: u32,
}

impl Pacer {
    pub fn new(mode: PacingMode, period: Duration) -> Self {
        Self { mode, period, start: Instant::now(), ticks: 0 }
    }

    /// Blocks until the next iteration may start.
    pub fn wait(&mut self) {
        self.ticks = self.ticks.saturating_add(1);
        match self.mode {
            PacingMode::Relative => std::thread::sleep(self.period),
            PacingMode::AbsoluteDeadline => {
                let target = self.start + self.period * self.ticks;
                let now = Instant::now();
                if target > now {
                    std::thread::sleep(target - now);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_never_shorter_than_period() {
        let mut p = Pacer::new(PacingMode::Relative, Duration::from_millis(2));
        let t = Instant::now();
        for _ in 0..5 {
            p.wait();
        }
        assert!(t.elapsed() >= Duration::from_millis(10));
    }

    #[test]
    fn absolute_catches_up() {
        let mut p = Pacer::new(PacingMode::AbsoluteDeadline, Duration::from_millis(5));
        std::thread::sleep(Duration::from_millis(12));
        let t = Instant::now();
        p.wait();
        p.wait();
        // both deadlines (5 ms, 10 ms) already passed
        assert!(t.elapsed() < Duration::from_millis(4));
    }
}
