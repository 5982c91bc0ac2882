//! Spectrum access for a secondary user over Markov-occupied channels.
//!
//! The secondary user (SU) may transmit on at most `L` of `N` channels per
//! slot and only learns a channel's primary-user (PU) occupancy by
//! transmitting on it. Each channel's knowledge is summarized by the last
//! observed occupancy and its age of information (AoI). The crate provides
//!
//! - closed-form chain arithmetic ([`markov`]),
//! - the decoupled single-channel problem with a dynamic-programming oracle
//!   ([`single_channel`]),
//! - Whittle, heuristic and correlated-band indices ([`indices`]),
//! - online transition-probability estimators ([`estimation`]),
//! - ground-truth occupancy worlds ([`environment`]),
//! - per-slot schedulers ([`scheduling`]),
//! - an episode runner, sweeps and CSV output ([`experiment`]).

pub mod environment;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod indices;
pub mod markov;
pub mod scheduling;
pub mod single_channel;

pub use error::{Error, Result};

/// Seeded pseudo-random stream used everywhere randomness is consumed.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Build the simulation stream for a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
