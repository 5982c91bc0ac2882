//! Ground-truth primary-user occupancy.
//!
//! Two worlds are supported: independent per-channel Markov chains
//! (optionally with slowly varying flip probabilities), and a single PU that
//! occupies a contiguous band whose center performs a discretized Gaussian
//! random walk.
//!
//! Gaussian steps are drawn with the Box–Muller cosine branch from two
//! uniforms of the seeded stream, `z = √(−2 ln(1 − u₁)) · cos(2π u₂)`, so a
//! seed fixes the trajectory on every platform.

use rand::Rng;

use crate::error::{Error, Result};
use crate::markov::{ChannelParams, Occupancy};

/// Piecewise-linear flip probability over slots.
#[derive(Debug, Clone, PartialEq)]
pub struct QSchedule {
    /// `(slot, q)` knots sorted by slot. Constant outside the knot range.
    knots: Vec<(u32, f64)>,
}

impl QSchedule {
    pub fn new(mut knots: Vec<(u32, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Config("a q schedule needs at least one knot".into()));
        }
        knots.sort_by_key(|&(slot, _)| slot);
        for &(slot, q) in &knots {
            if !(q > 0.0 && q < 0.5) {
                return Err(Error::Config(format!(
                    "q schedule value {q} at slot {slot} is outside (0, 0.5)"
                )));
            }
        }
        Ok(Self { knots })
    }

    /// Linear ramp from `start` at slot 0 to `end` at slot `horizon`.
    pub fn ramp(start: f64, end: f64, horizon: u32) -> Result<Self> {
        Self::new(vec![(0, start), (horizon, end)])
    }

    pub fn q_at(&self, slot: u32) -> f64 {
        let first = self.knots[0];
        if slot <= first.0 {
            return first.1;
        }
        for pair in self.knots.windows(2) {
            let ((s0, q0), (s1, q1)) = (pair[0], pair[1]);
            if slot <= s1 {
                if s1 == s0 {
                    return q1;
                }
                let frac = (slot - s0) as f64 / (s1 - s0) as f64;
                return q0 + frac * (q1 - q0);
            }
        }
        self.knots[self.knots.len() - 1].1
    }

    pub fn is_increasing(&self) -> bool {
        self.knots.last().unwrap().1 > self.knots[0].1
    }
}

/// Default non-stationary schedules: the first half of the channels ramp up
/// by `amplitude` over the horizon, the rest ramp down; end points are
/// clamped into `[0.01, 0.49]`.
pub fn split_ramp_schedules(
    initial: &[f64],
    horizon: u32,
    amplitude: f64,
) -> Result<Vec<QSchedule>> {
    let half = initial.len() / 2;
    initial
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let target = if i < half {
                q + amplitude
            } else {
                q - amplitude
            };
            QSchedule::ramp(q, target.clamp(0.01, 0.49), horizon)
        })
        .collect()
}

/// Independent Markov occupancy on `N` channels.
#[derive(Debug, Clone)]
pub struct IndependentWorld {
    pub channels: Vec<ChannelParams>,
    pub occupancy: Vec<Occupancy>,
    pub schedules: Option<Vec<QSchedule>>,
}

impl IndependentWorld {
    /// Start each channel in its stationary distribution (occupied w.p. ½).
    pub fn new<R: Rng + ?Sized>(channels: Vec<ChannelParams>, rng: &mut R) -> Self {
        let occupancy = channels
            .iter()
            .map(|_| {
                if rng.random::<f64>() < 0.5 {
                    Occupancy::Free
                } else {
                    Occupancy::Occupied
                }
            })
            .collect();
        Self {
            channels,
            occupancy,
            schedules: None,
        }
    }

    pub fn with_schedules(mut self, schedules: Vec<QSchedule>) -> Result<Self> {
        if schedules.len() != self.channels.len() {
            return Err(Error::Config(format!(
                "{} schedules for {} channels",
                schedules.len(),
                self.channels.len()
            )));
        }
        self.schedules = Some(schedules);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// True flip probability of `channel` during `slot`.
    pub fn q_at(&self, channel: usize, slot: u32) -> f64 {
        match &self.schedules {
            Some(s) => s[channel].q_at(slot),
            None => self.channels[channel].q(),
        }
    }

    /// Advance every channel one slot, one uniform draw per channel in
    /// channel order.
    pub fn step<R: Rng + ?Sized>(&mut self, slot: u32, rng: &mut R) {
        for ch in 0..self.channels.len() {
            let q = self.q_at(ch, slot);
            let u: f64 = rng.random();
            if u < q {
                self.occupancy[ch] = self.occupancy[ch].flipped();
            }
        }
    }
}

/// Free-standing form of [`IndependentWorld::step`].
pub fn step_independent<R: Rng + ?Sized>(world: &mut IndependentWorld, slot: u32, rng: &mut R) {
    world.step(slot, rng);
}

/// One draw from the standard normal distribution (Box–Muller, cosine branch).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// A PU occupying `band_width` contiguous channels around a moving center.
#[derive(Debug, Clone, PartialEq)]
pub struct BandWorld {
    pub total_channels: usize,
    pub band_width: usize,
    /// 1-based center channel, within `[1, N]`.
    pub center: i64,
    pub step_sigma: f64,
}

impl BandWorld {
    /// Start with the band centered at channel `N / 2`.
    pub fn new(total_channels: usize, band_width: usize, step_sigma: f64) -> Result<Self> {
        if total_channels == 0 || band_width == 0 || band_width > total_channels {
            return Err(Error::Config(format!(
                "band width {band_width} must lie in [1, {total_channels}]"
            )));
        }
        if !(step_sigma > 0.0) {
            return Err(Error::Config(format!(
                "sigma must be positive, got {step_sigma}"
            )));
        }
        Ok(Self {
            total_channels,
            band_width,
            center: (total_channels as i64 / 2).max(1),
            step_sigma,
        })
    }

    /// Move the center by a rounded Gaussian step, saturating at `[1, N]`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let w = self.step_sigma * standard_normal(rng);
        self.center = clamp_center(self.center as f64 + w, self.total_channels);
    }

    /// 1-based inclusive range of occupied channels before clipping:
    /// `P − B + ⌊B/2⌋ + 1 ..= P + ⌊B/2⌋`.
    pub fn band_span(&self) -> (i64, i64) {
        let hi = self.center + (self.band_width / 2) as i64;
        (hi - self.band_width as i64 + 1, hi)
    }

    pub fn is_occupied(&self, position: usize) -> bool {
        let (lo, hi) = self.band_span();
        (lo..=hi).contains(&(position as i64))
    }

    /// Occupancy of channels `1..=N`, returned 0-based.
    pub fn occupancy(&self) -> Vec<Occupancy> {
        (1..=self.total_channels)
            .map(|pos| {
                if self.is_occupied(pos) {
                    Occupancy::Occupied
                } else {
                    Occupancy::Free
                }
            })
            .collect()
    }
}

/// Round half away from zero, then clamp into `[1, n]`.
pub fn clamp_center(raw: f64, n: usize) -> i64 {
    (raw.round() as i64).clamp(1, n as i64)
}

/// Free-standing form of [`BandWorld::step`].
pub fn step_band<R: Rng + ?Sized>(world: &mut BandWorld, rng: &mut R) {
    world.step(rng);
}

/// Free-standing form of [`BandWorld::occupancy`].
pub fn band_occupancy(world: &BandWorld) -> Vec<Occupancy> {
    world.occupancy()
}
