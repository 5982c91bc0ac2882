//! Per-channel priority indices.
//!
//! Every index is `+∞` for a channel last observed free, so such channels
//! always rank first; ties among them are resolved by the scheduler.

use std::cmp::Ordering;

use crate::markov::{ChannelParams, Occupancy};

/// Extended-real priority: a finite non-negative value or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexValue(f64);

impl IndexValue {
    pub const INFINITE: IndexValue = IndexValue(f64::INFINITY);

    pub fn finite(value: f64) -> Self {
        debug_assert!(value.is_finite());
        IndexValue(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }
}

impl Eq for IndexValue {}

impl PartialOrd for IndexValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IndexValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Whittle index of a channel in belief state `(last, age)`.
///
/// For an occupied observation:
/// `W(1,Δ) = [Δ·d + p_Δ] / [(Δ−1)·d + p_Δ + q]` with `p_Δ = [Q^Δ]₁₀` and
/// `d = p_{Δ−1} − p_Δ = −q(1−2q)^{Δ−1}` (using `p_0 = 0`), so `W(1,1) = 0`.
pub fn whittle_index(last: Occupancy, age: u32, params: ChannelParams) -> IndexValue {
    debug_assert!(age >= 1);
    if last.is_free() {
        return IndexValue::INFINITE;
    }
    if age == 1 {
        // Exact by definition; the general formula leaves rounding residue.
        return IndexValue::finite(0.0);
    }
    let q = params.q();
    let prev_pow = params.decay_pow(age - 1);
    let p = 0.5 * (1.0 - params.decay() * prev_pow);
    // Closed form of the difference avoids cancellation at large ages.
    let d = -q * prev_pow;
    let age = age as f64;
    let num = age * d + p;
    let den = (age - 1.0) * d + p + q;
    IndexValue::finite((num / den).max(0.0))
}

/// Heuristic index: expected packets delivered before the first collision,
/// `[Q^Δ]₁₀ / q`, for an occupied observation.
pub fn heuristic_index(last: Occupancy, age: u32, params: ChannelParams) -> IndexValue {
    debug_assert!(age >= 1);
    if last.is_free() {
        return IndexValue::INFINITE;
    }
    IndexValue::finite(params.flip_prob_or_zero(age) / params.q())
}

/// Standard normal CDF, `0.5·erfc(−x/√2)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Which AoI values feed the mean age of a [`BandBelief`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanAgeMode {
    /// Average over every channel.
    #[default]
    AllChannels,
    /// Average over the channels observed in the last slot.
    Selected,
}

/// Estimate of where a moving PU band is centered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandBelief {
    /// Center estimate in 1-based channel units, kept within `[1, N]`.
    pub center_estimate: f64,
    /// Weight on the previous estimate in the blending update.
    pub memory: f64,
    /// Mean AoI used as the variance of the center estimate, ≥ 1.
    pub mean_age: f64,
    pub age_mode: MeanAgeMode,
    pub total_channels: usize,
}

impl BandBelief {
    /// Start centered on the spectrum with unit mean age.
    pub fn new(total_channels: usize, memory: f64, age_mode: MeanAgeMode) -> Self {
        Self {
            center_estimate: (total_channels as f64 + 1.0) / 2.0,
            memory,
            mean_age: 1.0,
            age_mode,
            total_channels,
        }
    }
}

/// Correlated-band index for the channel at 1-based `position`.
///
/// `[1 − Φ((i + B/2 − P̂)/√Δ̄) + Φ((i − B/2 − P̂)/√Δ̄)] · |i − P̂|²`: the
/// probability that the channel lies outside the band times a free-duration
/// proxy that grows with the squared distance from the band center.
pub fn correlated_index(
    position: usize,
    observed_occupied: bool,
    band: &BandBelief,
    band_width: usize,
) -> IndexValue {
    if !observed_occupied {
        return IndexValue::INFINITE;
    }
    let i = position as f64;
    let half = band_width as f64 / 2.0;
    let spread = band.mean_age.max(1.0).sqrt();
    let center = band.center_estimate;
    let outside = 1.0 - std_normal_cdf((i + half - center) / spread)
        + std_normal_cdf((i - half - center) / spread);
    let dist = i - center;
    IndexValue::finite((outside * dist * dist).max(0.0))
}

/// Fold one slot of observations into the band belief.
///
/// `observations` holds `(channel id, occupancy)` for the channels
/// transmitted on (0-based ids; channel `c` sits at position `c + 1`).
/// `ages` is indexed by channel id; in [`MeanAgeMode::AllChannels`] the mean
/// is over all entries, in [`MeanAgeMode::Selected`] over the observed ones.
pub fn update_band_belief(
    band: &BandBelief,
    observations: &[(usize, Occupancy)],
    ages: &[u32],
) -> BandBelief {
    let mut next = *band;

    let (sum, count) = observations
        .iter()
        .filter(|(_, occ)| occ.is_occupied())
        .fold((0.0, 0usize), |(s, c), &(ch, _)| {
            (s + (ch + 1) as f64, c + 1)
        });
    if count > 0 {
        let mean = sum / count as f64;
        let blended = band.memory * band.center_estimate + (1.0 - band.memory) * mean;
        next.center_estimate = blended.clamp(1.0, band.total_channels as f64);
    }

    let mean_age = match band.age_mode {
        MeanAgeMode::AllChannels => mean(ages.iter().map(|&a| a as f64)),
        MeanAgeMode::Selected => mean(observations.iter().map(|&(ch, _)| ages[ch] as f64)),
    };
    if let Some(m) = mean_age {
        next.mean_age = m.max(1.0);
    }
    next
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}
