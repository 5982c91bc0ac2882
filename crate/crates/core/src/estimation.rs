//! Online estimation of a channel's flip probability from observed
//! transitions.
//!
//! Only transitions starting from a free observation are counted. With
//! `forgetting = 1` this is the plain maximum-likelihood estimate; with
//! `forgetting < 1` the counts are scaled down (integer floor) at every
//! window boundary so older windows weigh less.

use crate::markov::Occupancy;

/// Lower clamp of [`TransitionCounts::estimate`].
pub const MIN_ESTIMATE: f64 = 1e-4;
/// Upper clamp of [`TransitionCounts::estimate`].
pub const MAX_ESTIMATE: f64 = 0.5 - 1e-4;
/// Estimate used before any transition has been observed.
pub const DEFAULT_PRIOR: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCounts {
    /// Observed free → occupied transitions.
    pub n01: u64,
    /// Observed free → free transitions.
    pub n00: u64,
    /// Slots since the last window boundary.
    pub window_position: u32,
    /// Factor in `(0, 1]` applied at each window boundary.
    pub forgetting: f64,
    pub window_length: u32,
}

impl TransitionCounts {
    /// Plain cumulative counts.
    pub fn cumulative() -> Self {
        Self::windowed(u32::MAX, 1.0)
    }

    /// Exponentially weighted counts: every `window_length` slots both
    /// counts become `⌊forgetting · count⌋`.
    pub fn windowed(window_length: u32, forgetting: f64) -> Self {
        assert!(window_length >= 1, "window length must be positive");
        assert!(
            forgetting > 0.0 && forgetting <= 1.0,
            "forgetting factor must lie in (0, 1]"
        );
        Self {
            n01: 0,
            n00: 0,
            window_position: 0,
            forgetting,
            window_length,
        }
    }

    /// Count a transition observed on the same channel in consecutive slots.
    /// Transitions out of an occupied observation are ignored.
    pub fn record(&mut self, from: Occupancy, to: Occupancy) {
        if from.is_free() {
            match to {
                Occupancy::Free => self.n00 += 1,
                Occupancy::Occupied => self.n01 += 1,
            }
        }
    }

    /// Close one slot. At a window boundary the counts are floored down by
    /// the forgetting factor before the next slot's increments arrive.
    pub fn advance_window(&mut self) {
        self.window_position += 1;
        if self.window_position >= self.window_length {
            self.window_position = 0;
            let alpha = self.forgetting;
            if alpha < 1.0 {
                self.n01 = (alpha * self.n01 as f64).floor() as u64;
                self.n00 = (alpha * self.n00 as f64).floor() as u64;
            }
        }
    }

    pub fn observations(&self) -> u64 {
        self.n01 + self.n00
    }

    /// `n01 / (n01 + n00)` clamped into `[1e-4, 0.5 − 1e-4]`, or `prior`
    /// when nothing has been counted.
    pub fn estimate(&self, prior: f64) -> f64 {
        let total = self.observations();
        if total == 0 {
            return prior;
        }
        (self.n01 as f64 / total as f64).clamp(MIN_ESTIMATE, MAX_ESTIMATE)
    }
}

/// Which estimator a learning policy runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    Mle,
    EwMle { window_length: u32, forgetting: f64 },
}

impl EstimatorKind {
    pub fn counts(&self) -> TransitionCounts {
        match *self {
            EstimatorKind::Mle => TransitionCounts::cumulative(),
            EstimatorKind::EwMle {
                window_length,
                forgetting,
            } => TransitionCounts::windowed(window_length, forgetting),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::ChannelParams;
    use crate::markov::Occupancy::{Free, Occupied};
    use crate::rng_from_seed;
    use rand::Rng;

    #[test]
    fn record_examples() {
        let mut c = TransitionCounts::cumulative();
        c.record(Free, Occupied);
        assert_eq!((c.n01, c.n00), (1, 0));
        c.record(Free, Free);
        assert_eq!((c.n01, c.n00), (1, 1));
        c.record(Occupied, Free);
        c.record(Occupied, Occupied);
        assert_eq!((c.n01, c.n00), (1, 1));
    }

    #[test]
    fn estimate_examples() {
        let mut c = TransitionCounts::cumulative();
        assert_eq!(c.estimate(0.3), 0.3);
        c.n01 = 1;
        c.n00 = 3;
        assert_eq!(c.estimate(0.3), 0.25);
        c.n01 = 0;
        assert_eq!(c.estimate(0.3), MIN_ESTIMATE);
        c.n01 = 5;
        c.n00 = 0;
        assert_eq!(c.estimate(0.3), MAX_ESTIMATE);
    }

    #[test]
    fn window_decay_uses_floor() {
        let mut c = TransitionCounts::windowed(10, 0.5);
        c.n01 = 7;
        c.n00 = 9;
        for _ in 0..9 {
            c.advance_window();
        }
        assert_eq!((c.n01, c.n00), (7, 9));
        c.advance_window();
        assert_eq!((c.n01, c.n00), (3, 4));
        c.record(Free, Occupied);
        assert_eq!(c.n01, 4);
        assert_eq!(c.window_position, 0);
    }

    #[test]
    fn unit_forgetting_keeps_counts() {
        let mut c = TransitionCounts::windowed(3, 1.0);
        c.n01 = 7;
        for _ in 0..30 {
            c.advance_window();
        }
        assert_eq!(c.n01, 7);
    }

    #[test]
    fn unit_forgetting_equals_plain_mle() {
        let p = ChannelParams::new(0.17).unwrap();
        let mut rng = rng_from_seed(3);
        let mut plain = TransitionCounts::cumulative();
        let mut ew = TransitionCounts::windowed(50, 1.0);
        let mut state = Free;
        for _ in 0..20_000 {
            let next = p.step(state, &mut rng);
            plain.record(state, next);
            ew.record(state, next);
            plain.advance_window();
            ew.advance_window();
            assert_eq!(plain.estimate(0.3), ew.estimate(0.3));
            state = next;
        }
    }

    #[test]
    fn stationary_consistency() {
        let q = 0.2;
        let p = ChannelParams::new(q).unwrap();
        let n = 10_000u64;
        let trials = 1000;
        let mut rng = rng_from_seed(2024);
        let mut within = 0;
        for _ in 0..trials {
            let mut c = TransitionCounts::cumulative();
            let mut state: Occupancy = if rng.random::<bool>() { Free } else { Occupied };
            while c.observations() < n {
                let next = p.step(state, &mut rng);
                c.record(state, next);
                state = next;
            }
            let bound = 3.0 * (q * (1.0 - q) / n as f64).sqrt();
            if (c.estimate(0.3) - q).abs() <= bound {
                within += 1;
            }
        }
        assert!(within as f64 / trials as f64 >= 0.99, "within {within}");
    }

    #[test]
    fn estimate_always_valid_params() {
        let mut c = TransitionCounts::cumulative();
        for (a, b) in [(0, 1), (1, 0), (1, 1), (1000, 1), (1, 1000)] {
            c.n01 = a;
            c.n00 = b;
            assert!(ChannelParams::new(c.estimate(0.3)).is_ok());
        }
    }

    #[test]
    fn windowed_estimator_tracks_a_ramp_better() {
        let horizon = 30_000u32;
        let mut rng = rng_from_seed(99);
        let mut plain = TransitionCounts::cumulative();
        let mut ew = TransitionCounts::windowed(1000, 0.5);
        let (mut err_plain, mut err_ew) = (0.0, 0.0);
        let mut state = Free;
        for t in 0..horizon {
            let q = 0.1 + 0.3 * t as f64 / (horizon - 1) as f64;
            let next = ChannelParams::new(q).unwrap().step(state, &mut rng);
            for c in [&mut plain, &mut ew] {
                c.record(state, next);
                c.advance_window();
            }
            err_plain += (plain.estimate(DEFAULT_PRIOR) - q).abs();
            err_ew += (ew.estimate(DEFAULT_PRIOR) - q).abs();
            state = next;
        }
        assert!(err_ew < err_plain, "ew {err_ew} plain {err_plain}");
    }
}
