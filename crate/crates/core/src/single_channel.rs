//! The decoupled single-channel problem.
//!
//! One channel, one binary action per slot, reward `R(t) - D·u(t)` where
//! `D` is the effective transmission cost. The optimal policy is of
//! threshold type: always transmit after a success, and after a collision
//! wait until the age of information reaches `H`. This module evaluates
//! threshold policies in closed form, picks the best threshold, and carries
//! an independent relative-value-iteration solver over the `(x̂, Δ)` state
//! space used to cross-check both.

use std::fmt;

use crate::error::{Error, Result};
use crate::markov::{ChannelParams, Occupancy};

/// Largest threshold ever scanned.
pub const MAX_THRESHOLD: u32 = 100_000;

/// Values of λ closer than this are treated as ties (smaller `H` wins).
const TIE_TOLERANCE: f64 = 1e-12;

/// Waiting threshold of a threshold policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Threshold {
    /// Retry once the AoI of an occupied observation reaches this value.
    Finite(u32),
    /// Never transmit.
    Never,
}

impl Threshold {
    /// Whether a channel last seen occupied `age` slots ago may be retried.
    pub fn permits(&self, age: u32) -> bool {
        match *self {
            Threshold::Finite(h) => age >= h,
            Threshold::Never => false,
        }
    }

    pub fn finite(&self) -> Option<u32> {
        match *self {
            Threshold::Finite(h) => Some(h),
            Threshold::Never => None,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(h) => write!(f, "{h}"),
            Threshold::Never => write!(f, "inf"),
        }
    }
}

/// Effective transmission cost `(γ + C) / (1 + γ)` for collision penalty
/// `gamma` and channel access price `price`.
pub fn effective_cost(gamma: f64, price: f64) -> f64 {
    (gamma + price) / (1.0 + gamma)
}

/// Time-average reward of the threshold policy with threshold `threshold`
/// (must be ≥ 1) at effective cost `cost`. Negative values mean idling
/// forever is better.
pub fn average_reward(params: ChannelParams, threshold: u32, cost: f64) -> f64 {
    debug_assert!(threshold >= 1);
    let p_h = params.flip_prob_or_zero(threshold);
    let q = params.q();
    (p_h - (p_h + q) * cost) / (p_h + threshold as f64 * q)
}

/// A threshold policy together with its gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicyEval {
    pub threshold: Threshold,
    pub effective_cost: f64,
    pub gain: f64,
}

impl ThresholdPolicyEval {
    pub fn evaluate(params: ChannelParams, threshold: Threshold, cost: f64) -> Self {
        let gain = match threshold {
            Threshold::Finite(h) => average_reward(params, h, cost),
            Threshold::Never => 0.0,
        };
        Self {
            threshold,
            effective_cost: cost,
            gain,
        }
    }

    /// Best threshold for `(params, cost)` with its gain.
    pub fn optimal(params: ChannelParams, cost: f64) -> Self {
        Self::evaluate(params, optimal_threshold(params, cost), cost)
    }
}

/// Smallest `H` with `(1-2q)^H < 1e-12`, capped at [`MAX_THRESHOLD`].
pub fn scan_limit(params: ChannelParams) -> u32 {
    let decay = params.decay();
    let h = (1e-12f64.ln() / decay.ln()).ceil();
    if !h.is_finite() || h >= MAX_THRESHOLD as f64 {
        MAX_THRESHOLD
    } else {
        (h as u32).max(1)
    }
}

/// Threshold maximizing [`average_reward`], ties to the smaller `H`;
/// [`Threshold::Never`] when no threshold earns a positive reward.
pub fn optimal_threshold(params: ChannelParams, cost: f64) -> Threshold {
    let q = params.q();
    let decay = params.decay();
    let limit = scan_limit(params);

    let mut power = 1.0;
    let mut best_gain = f64::NEG_INFINITY;
    let mut best_h = 1;
    for h in 1..=limit {
        power *= decay;
        let p_h = 0.5 * (1.0 - power);
        let gain = (p_h - (p_h + q) * cost) / (p_h + h as f64 * q);
        if gain > best_gain + TIE_TOLERANCE {
            best_gain = gain;
            best_h = h;
        }
    }
    if best_gain > 0.0 {
        Threshold::Finite(best_h)
    } else {
        Threshold::Never
    }
}

/// Relative value `S(0,1)` of a fresh free observation under a threshold
/// policy with gain `gain` (reference `S(1,1) = 0`).
pub fn relative_value_free(params: ChannelParams, cost: f64, gain: f64) -> f64 {
    let q = params.q();
    ((1.0 - q) - cost - gain) / q
}

/// `g(H) = ([Q^{H+1}]₁₀ − [Q^H]₁₀)(S + 1)`; an optimal finite threshold
/// `H*` satisfies `g(H*) ≤ λ ≤ g(H*−1)`. Requires `S > −1`.
pub fn g_certificate(params: ChannelParams, threshold: u32, relative_value: f64) -> Result<f64> {
    if relative_value.is_nan() || relative_value <= -1.0 {
        return Err(Error::InvalidRelativeValue(relative_value));
    }
    let step = params.flip_prob_or_zero(threshold + 1) - params.flip_prob_or_zero(threshold);
    Ok(step * (relative_value + 1.0))
}

/// Output of [`solve_dp`].
#[derive(Debug, Clone)]
pub struct DpSolution {
    pub gain: f64,
    pub delta_max: u32,
    pub iterations: usize,
    /// Differential values indexed `[x̂][Δ-1]`, normalized so `S(1,1) = 0`.
    values: [Vec<f64>; 2],
    /// `true` = transmit, same indexing as `values`.
    actions: [Vec<bool>; 2],
    params: ChannelParams,
    cost: f64,
}

impl DpSolution {
    pub fn value(&self, last: Occupancy, age: u32) -> f64 {
        self.values[last.bit() as usize][age as usize - 1]
    }

    pub fn transmits(&self, last: Occupancy, age: u32) -> bool {
        self.actions[last.bit() as usize][age as usize - 1]
    }

    /// First age at which the policy retries an occupied channel.
    pub fn threshold(&self) -> Threshold {
        self.actions[1]
            .iter()
            .position(|&a| a)
            .map(|i| Threshold::Finite(i as u32 + 1))
            .unwrap_or(Threshold::Never)
    }

    /// Whether the occupied-row actions are all-wait followed by all-transmit.
    pub fn is_threshold_type(&self) -> bool {
        self.actions[1].windows(2).all(|w| !(w[0] && !w[1]))
    }

    pub fn transmits_whenever_free(&self) -> bool {
        self.actions[0].iter().all(|&a| a)
    }

    /// Largest violation of the average-reward Bellman equation over all
    /// states, using the solver's own transition model.
    pub fn bellman_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for last in [Occupancy::Free, Occupancy::Occupied] {
            for age in 1..=self.delta_max {
                let (wait, send) = action_values(self.params, self.cost, &self.values, last, age);
                let rhs = wait.max(send) - self.gain;
                worst = worst.max((rhs - self.value(last, age)).abs());
            }
        }
        worst
    }
}

fn action_values(
    params: ChannelParams,
    cost: f64,
    values: &[Vec<f64>; 2],
    last: Occupancy,
    age: u32,
) -> (f64, f64) {
    let delta_max = values[0].len() as u32;
    let row = last.bit() as usize;
    let next_age = (age + 1).min(delta_max);
    let wait = values[row][next_age as usize - 1];
    let free = match last {
        Occupancy::Occupied => params.flip_prob_or_zero(age),
        Occupancy::Free => params.stay_prob(age),
    };
    let send = free * (1.0 + values[0][0]) + (1.0 - free) * values[1][0] - cost;
    (wait, send)
}

const MAX_SWEEPS: usize = 500_000;
const ACTION_TIE: f64 = 1e-8;

/// Relative value iteration for the single-channel average-reward MDP.
///
/// States are `(x̂, Δ)` with `Δ ∈ [1, delta_max]`; waiting at `delta_max`
/// stays there. Each sweep subtracts the value of `(1, 1)`. Stops when the
/// span of `T h − h` drops below `tolerance`.
pub fn solve_dp(
    params: ChannelParams,
    cost: f64,
    delta_max: u32,
    tolerance: f64,
) -> Result<DpSolution> {
    if delta_max < 10 {
        return Err(Error::InvalidSolverInput(format!(
            "delta_max must be at least 10, got {delta_max}"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidSolverInput(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }

    let n = delta_max as usize;
    let mut values = [vec![0.0; n], vec![0.0; n]];
    let mut next = [vec![0.0; n], vec![0.0; n]];
    let mut span = f64::INFINITY;

    for sweep in 1..=MAX_SWEEPS {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for last in [Occupancy::Free, Occupancy::Occupied] {
            let row = last.bit() as usize;
            for age in 1..=delta_max {
                let (wait, send) = action_values(params, cost, &values, last, age);
                let updated = wait.max(send);
                let diff = updated - values[row][age as usize - 1];
                lo = lo.min(diff);
                hi = hi.max(diff);
                next[row][age as usize - 1] = updated;
            }
        }
        span = hi - lo;
        let reference = next[1][0];
        let gain = reference - values[1][0];
        for row in next.iter_mut() {
            for v in row.iter_mut() {
                *v -= reference;
            }
        }
        std::mem::swap(&mut values, &mut next);

        if span < tolerance {
            let mut actions = [vec![false; n], vec![false; n]];
            for last in [Occupancy::Free, Occupancy::Occupied] {
                let row = last.bit() as usize;
                for age in 1..=delta_max {
                    let (wait, send) = action_values(params, cost, &values, last, age);
                    actions[row][age as usize - 1] = send >= wait - ACTION_TIE;
                }
            }
            return Ok(DpSolution {
                gain,
                delta_max,
                iterations: sweep,
                values,
                actions,
                params,
                cost,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_SWEEPS,
        span,
    })
}

/// Default truncation for [`solve_dp`]: `max(200, 2·scan_limit)`.
pub fn default_delta_max(params: ChannelParams) -> u32 {
    200u32.max(scan_limit(params).saturating_mul(2))
}
