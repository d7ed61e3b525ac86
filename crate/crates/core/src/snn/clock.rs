/// Simulation tick counter. One tick is [`DT_MS`] of simulated time.
pub type Tick = u64;

/// Simulated time per tick, in milliseconds. Equal to the minimum synaptic
/// delay of the avoidance network, so every delay is an integer tick count.
pub const DT_MS: f64 = 0.1;

/// Convert a duration in milliseconds to ticks, rounding to nearest.
pub fn ms_to_ticks(ms: f64) -> Tick {
    (ms / DT_MS).round() as Tick
}

/// Monotonic simulation clock.
///
/// `tick` never rewinds; `advance` is the only mutator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    tick: Tick,
}

impl SimClock {
    pub fn new() -> Self {
        SimClock { tick: 0 }
    }

    #[inline]
    pub fn tick(&self) -> Tick {
        self.tick
    }

    #[inline]
    pub fn time_ms(&self) -> f64 {
        self.tick as f64 * DT_MS
    }

    #[inline]
    pub fn advance(&mut self) {
        self.tick += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_round_to_nearest() {
        assert_eq!(ms_to_ticks(0.1), 1);
        assert_eq!(ms_to_ticks(10.0), 100);
        assert_eq!(ms_to_ticks(1.0), 10);
        assert_eq!(ms_to_ticks(0.05), 1);
    }

    #[test]
    fn clock_is_monotone() {
        let mut c = SimClock::new();
        let mut prev = c.tick();
        for _ in 0..10 {
            c.advance();
            assert!(c.tick() > prev);
            prev = c.tick();
        }
        assert!((c.time_ms() - 1.0).abs() < 1e-12);
    }
}
