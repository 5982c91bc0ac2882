//! One seeded episode: a world, a policy, and `T` slots of feedback.

use rand::SeedableRng;

use super::config::{Scenario, WorldKind};
use crate::environment::{BandWorld, IndependentWorld};
use crate::error::Result;
use crate::indices::{update_band_belief, BandBelief};
use crate::markov::{ChannelParams, Occupancy};
use crate::scheduling::{
    update_beliefs, BeliefState, CheckEmptyState, Decision, IndexModel, IndexRule, PolicyKind,
    PolicySpec, TransitionLearner,
};
use crate::SimRng;

/// Raw counts of one episode plus the normalizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub successes: u64,
    pub collisions: u64,
    pub attempts: u64,
    /// Successes of an omniscient scheduler that always picks up to `L`
    /// truly free channels.
    pub genie_successes: u64,
    pub slots: u32,
    pub budget: usize,
    pub gamma: f64,
}

impl RunMetrics {
    fn capacity(&self) -> f64 {
        self.budget as f64 * self.slots as f64
    }

    /// Successes per channel-slot of budget, `s / (L·T)`.
    pub fn normalized_throughput(&self) -> f64 {
        self.successes as f64 / self.capacity()
    }

    /// Collisions per channel-slot of budget, `c / (L·T)`.
    pub fn collision_rate(&self) -> f64 {
        self.collisions as f64 / self.capacity()
    }

    pub fn collision_per_attempt(&self) -> f64 {
        self.collisions as f64 / self.attempts.max(1) as f64
    }

    /// `(s − γ·c) / (L·T)`.
    pub fn objective(&self) -> f64 {
        (self.successes as f64 - self.gamma * self.collisions as f64) / self.capacity()
    }

    /// Fraction of the budget actually used.
    pub fn attempt_fraction(&self) -> f64 {
        self.attempts as f64 / self.capacity()
    }

    pub fn genie_throughput(&self) -> f64 {
        self.genie_successes as f64 / self.capacity()
    }
}

enum World {
    Independent(IndependentWorld),
    Band(BandWorld, Vec<Occupancy>),
}

impl World {
    fn occupancy(&self) -> &[Occupancy] {
        match self {
            World::Independent(w) => &w.occupancy,
            World::Band(_, occ) => occ,
        }
    }

    fn step(&mut self, slot: u32, rng: &mut SimRng) {
        match self {
            World::Independent(w) => w.step(slot, rng),
            World::Band(w, occ) => {
                w.step(rng);
                *occ = w.occupancy();
            }
        }
    }
}

/// The world and the policy draw from separate streams of the same seed, so
/// every policy faces the same occupancy trajectory for a given seed.
fn streams(seed: u64) -> (SimRng, SimRng) {
    let world = SimRng::seed_from_u64(seed);
    let mut policy = SimRng::seed_from_u64(seed);
    policy.set_stream(1);
    (world, policy)
}

/// Simulate `scenario.horizon` slots of `policy`.
///
/// Each slot: the policy decides from its beliefs, transmissions are scored
/// against the current occupancy, the world steps, and beliefs, estimators
/// and the band estimate absorb the ACKs.
pub fn run_episode(scenario: &Scenario, policy: &PolicySpec, seed: u64) -> Result<RunMetrics> {
    policy.validate(scenario.world == WorldKind::Band)?;
    let (n, budget) = (scenario.n, scenario.l);
    let (mut world_rng, mut policy_rng) = streams(seed);

    let mut world = match scenario.world {
        WorldKind::Independent => {
            let params = scenario
                .qs
                .iter()
                .map(|&q| ChannelParams::new(q))
                .collect::<Result<Vec<_>>>()?;
            let mut w = IndependentWorld::new(params, &mut world_rng);
            if let Some(s) = &scenario.schedules {
                w = w.with_schedules(s.clone())?;
            }
            World::Independent(w)
        }
        WorldKind::Band => {
            let w = BandWorld::new(n, scenario.band_width, scenario.sigma)?;
            let occ = w.occupancy();
            World::Band(w, occ)
        }
    };

    let rule = match policy.kind {
        PolicyKind::WhittleIndex => Some(IndexRule::Whittle),
        PolicyKind::HeuristicIndex => Some(IndexRule::Heuristic),
        _ => None,
    };
    let mut learner = policy
        .learning
        .estimator()
        .map(|kind| TransitionLearner::new(n, kind, scenario.prior_q));
    let mut model = match rule {
        Some(_) => {
            let qs: Vec<f64> = match &learner {
                Some(_) => vec![scenario.prior_q; n],
                None => scenario.qs.clone(),
            };
            let params = qs
                .into_iter()
                .map(ChannelParams::new)
                .collect::<Result<Vec<_>>>()?;
            Some(IndexModel::new(params, policy.gate_cost()))
        }
        None => None,
    };
    if rule.is_some() && scenario.world == WorldKind::Band {
        return Err(crate::Error::Config(format!(
            "{policy} needs the independent world"
        )));
    }
    let tracks_schedule = learner.is_none() && scenario.schedules.is_some();

    let mut beliefs = vec![BeliefState::default(); n];
    let mut check_empty = CheckEmptyState::new();
    let mut band = BandBelief::new(n, scenario.alpha_memory, scenario.age_mode);
    let mut observations: Vec<(usize, Occupancy)> = Vec::with_capacity(budget);
    let mut ages = vec![0u32; n];

    let mut m = RunMetrics {
        successes: 0,
        collisions: 0,
        attempts: 0,
        genie_successes: 0,
        slots: scenario.horizon,
        budget,
        gamma: scenario.gamma,
    };

    for t in 0..scenario.horizon {
        if let (Some(model), World::Independent(w)) = (&mut model, &world) {
            if let Some(learner) = &learner {
                for ch in 0..n {
                    model.set_q(ch, ChannelParams::new(learner.estimate(ch))?);
                }
            } else if tracks_schedule {
                for ch in 0..n {
                    model.set_q(ch, ChannelParams::new(w.q_at(ch, t))?);
                }
            }
        }

        let decision = match policy.kind {
            PolicyKind::PureRandom => {
                crate::scheduling::decide_pure_random(n, budget, &mut policy_rng)
            }
            PolicyKind::CheckEmptyRandom => {
                check_empty.decide(&observations, n, budget, &mut policy_rng)
            }
            PolicyKind::WhittleIndex | PolicyKind::HeuristicIndex => match (&mut model, rule) {
                (Some(model), Some(rule)) => model.decide(&beliefs, rule, budget),
                _ => Decision::default(),
            },
            PolicyKind::CorrelatedHeuristic => {
                crate::scheduling::decide_correlated(&beliefs, &band, scenario.band_width, budget)
            }
        };

        let truth = world.occupancy();
        observations.clear();
        observations.extend(decision.transmit.iter().map(|&ch| (ch, truth[ch])));
        for &(_, occ) in &observations {
            m.attempts += 1;
            match occ {
                Occupancy::Free => m.successes += 1,
                Occupancy::Occupied => m.collisions += 1,
            }
        }
        let free = truth.iter().filter(|o| o.is_free()).count();
        m.genie_successes += free.min(budget) as u64;

        if let Some(learner) = &mut learner {
            for &(ch, occ) in &observations {
                learner.observe(t, ch, occ);
            }
            learner.end_slot();
        }

        world.step(t, &mut world_rng);

        let correlated = policy.kind == PolicyKind::CorrelatedHeuristic;
        if correlated {
            // Decision-time ages, used by the selected-channels mean.
            for (a, b) in ages.iter_mut().zip(&beliefs) {
                *a = b.age;
            }
        }
        update_beliefs(&mut beliefs, &decision, &observations)?;
        if correlated {
            if band.age_mode == crate::indices::MeanAgeMode::AllChannels {
                for (a, b) in ages.iter_mut().zip(&beliefs) {
                    *a = b.age;
                }
            }
            band = update_band_belief(&band, &observations, &ages);
        }
    }

    debug_assert_eq!(m.successes + m.collisions, m.attempts);
    debug_assert!(m.successes <= m.genie_successes);
    Ok(m)
}
