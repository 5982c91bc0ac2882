//! Symmetric two-state occupancy chain.
//!
//! A channel flips between free and occupied with the same per-slot
//! probability `q` in both directions, so its transition matrix is
//! `[[1-q, q], [q, 1-q]]`. The matrix diagonalizes with eigenvalues `1` and
//! `1 - 2q`, which gives the `delta`-step flip probability in closed form:
//! `(1 - (1 - 2q)^delta) / 2`.

use rand::Rng;

use crate::error::{Error, Result};

/// Per-channel flip probability of the symmetric occupancy chain.
///
/// Always strictly inside `(0, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ChannelParams {
    q: f64,
}

impl ChannelParams {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 0.5 {
            Ok(Self { q })
        } else {
            Err(Error::InvalidFlipProbability(q))
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Second eigenvalue of the transition matrix, `1 - 2q`.
    pub fn decay(&self) -> f64 {
        1.0 - 2.0 * self.q
    }

    /// Probability that the occupancy differs from what it was `delta`
    /// slots ago. Rejects `delta == 0`.
    pub fn flip_prob(&self, delta: u32) -> Result<f64> {
        if delta == 0 {
            return Err(Error::ZeroAge);
        }
        Ok(self.flip_prob_or_zero(delta))
    }

    /// Same as [`flip_prob`](Self::flip_prob) but returns 0 for `delta == 0`
    /// (the zeroth power of the matrix is the identity).
    pub fn flip_prob_or_zero(&self, delta: u32) -> f64 {
        if delta == 0 {
            return 0.0;
        }
        0.5 * (1.0 - self.decay_pow(delta))
    }

    /// Probability the occupancy is unchanged after `delta` slots.
    pub fn stay_prob(&self, delta: u32) -> f64 {
        1.0 - self.flip_prob_or_zero(delta)
    }

    /// `(1 - 2q)^delta`.
    pub fn decay_pow(&self, delta: u32) -> f64 {
        // powi takes i32; beyond that range the power has long underflowed.
        if delta > i32::MAX as u32 {
            return 0.0;
        }
        self.decay().powi(delta as i32)
    }

    /// Advance one slot, flipping with probability `q`. Consumes exactly one
    /// uniform draw from `rng`.
    pub fn step<R: Rng + ?Sized>(&self, current: Occupancy, rng: &mut R) -> Occupancy {
        let u: f64 = rng.random();
        if u < self.q {
            current.flipped()
        } else {
            current
        }
    }
}

/// Free-standing form of [`ChannelParams::flip_prob`].
pub fn flip_prob(params: ChannelParams, delta: u32) -> Result<f64> {
    params.flip_prob(delta)
}

/// Free-standing form of [`ChannelParams::flip_prob_or_zero`].
pub fn flip_prob_or_zero(params: ChannelParams, delta: u32) -> f64 {
    params.flip_prob_or_zero(delta)
}

/// PU occupancy of one channel in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occupancy {
    Free,
    Occupied,
}

impl Occupancy {
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Occupancy::Free
        } else {
            Occupancy::Occupied
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Occupancy::Free => 0,
            Occupancy::Occupied => 1,
        }
    }

    pub fn is_free(self) -> bool {
        self == Occupancy::Free
    }

    pub fn is_occupied(self) -> bool {
        self == Occupancy::Occupied
    }

    pub fn flipped(self) -> Self {
        match self {
            Occupancy::Free => Occupancy::Occupied,
            Occupancy::Occupied => Occupancy::Free,
        }
    }
}
