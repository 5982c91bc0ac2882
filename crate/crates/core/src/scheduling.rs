//! Per-slot channel selection.
//!
//! The SU keeps one [`BeliefState`] per channel and learns occupancy only
//! from the outcome of its own transmissions. Index policies rank channels
//! by an index, keep the top `L`, and (for the decoupled indices) let a
//! channel last seen occupied transmit only once its age reaches the
//! optimal waiting threshold. Untransmitted top-`L` slots are left idle.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::estimation::{EstimatorKind, TransitionCounts};
use crate::indices::{correlated_index, heuristic_index, whittle_index, BandBelief, IndexValue};
use crate::markov::{ChannelParams, Occupancy};
use crate::single_channel::{optimal_threshold, Threshold};

/// Change in a channel's flip probability that triggers a threshold
/// recomputation.
pub const THRESHOLD_REFRESH: f64 = 1e-3;

/// What the SU knows about one channel: the last observed occupancy and
/// how many slots ago it was observed (always ≥ 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeliefState {
    pub last_observed: Occupancy,
    pub age: u32,
}

impl Default for BeliefState {
    /// Every channel starts as "occupied, one slot old".
    fn default() -> Self {
        Self {
            last_observed: Occupancy::Occupied,
            age: 1,
        }
    }
}

/// Channels the SU transmits on in one slot, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decision {
    pub transmit: Vec<usize>,
}

impl Decision {
    pub fn new(mut transmit: Vec<usize>) -> Self {
        transmit.sort_unstable();
        Self { transmit }
    }

    pub fn len(&self) -> usize {
        self.transmit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmit.is_empty()
    }

    pub fn contains(&self, channel: usize) -> bool {
        self.transmit.binary_search(&channel).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    PureRandom,
    CheckEmptyRandom,
    WhittleIndex,
    HeuristicIndex,
    CorrelatedHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Learning {
    Off,
    Mle,
    EwMle { window_length: u32, forgetting: f64 },
}

impl Learning {
    pub fn estimator(&self) -> Option<EstimatorKind> {
        match *self {
            Learning::Off => None,
            Learning::Mle => Some(EstimatorKind::Mle),
            Learning::EwMle {
                window_length,
                forgetting,
            } => Some(EstimatorKind::EwMle {
                window_length,
                forgetting,
            }),
        }
    }
}

/// Which scheduler to run and with what parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub learning: Learning,
    /// Collision penalty γ ≥ 0.
    pub collision_penalty: f64,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, collision_penalty: f64) -> Self {
        Self {
            kind,
            learning: Learning::Off,
            collision_penalty,
        }
    }

    pub fn with_learning(mut self, learning: Learning) -> Self {
        self.learning = learning;
        self
    }

    /// Effective cost used by the threshold gate, `γ / (1 + γ)`.
    pub fn gate_cost(&self) -> f64 {
        crate::single_channel::effective_cost(self.collision_penalty, 0.0)
    }

    pub fn validate(&self, band_world: bool) -> Result<()> {
        if !(self.collision_penalty >= 0.0) {
            return Err(Error::Config(format!(
                "collision penalty must be non-negative, got {}",
                self.collision_penalty
            )));
        }
        if self.kind == PolicyKind::CorrelatedHeuristic && !band_world {
            return Err(Error::Config(
                "correlated_heuristic requires the band world".into(),
            ));
        }
        if self.learning != Learning::Off
            && !matches!(
                self.kind,
                PolicyKind::WhittleIndex | PolicyKind::HeuristicIndex
            )
        {
            return Err(Error::Config(format!(
                "learning is only available for whittle and heuristic policies, not {}",
                self.kind_name()
            )));
        }
        Ok(())
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            PolicyKind::PureRandom => "pure_random",
            PolicyKind::CheckEmptyRandom => "check_empty_random",
            PolicyKind::WhittleIndex => "whittle",
            PolicyKind::HeuristicIndex => "heuristic",
            PolicyKind::CorrelatedHeuristic => "correlated_heuristic",
        }
    }

    /// Parse a policy name such as `whittle` or `heuristic_ewmle`.
    /// Estimator hyperparameters come from `ewmle`.
    pub fn parse(name: &str, collision_penalty: f64, ewmle: (u32, f64)) -> Result<Self> {
        let (base, learning) = match name.trim() {
            n if n.ends_with("_ewmle") => (
                &n[..n.len() - 6],
                Learning::EwMle {
                    window_length: ewmle.0,
                    forgetting: ewmle.1,
                },
            ),
            n if n.ends_with("_mle") => (&n[..n.len() - 4], Learning::Mle),
            n => (n, Learning::Off),
        };
        let kind = match base {
            "pure_random" => PolicyKind::PureRandom,
            "check_empty_random" => PolicyKind::CheckEmptyRandom,
            "whittle" => PolicyKind::WhittleIndex,
            "heuristic" => PolicyKind::HeuristicIndex,
            "correlated_heuristic" => PolicyKind::CorrelatedHeuristic,
            _ => return Err(Error::Config(format!("unknown policy `{name}`"))),
        };
        let parsed = Self {
            kind,
            learning,
            collision_penalty,
        };
        if learning != Learning::Off
            && !matches!(kind, PolicyKind::WhittleIndex | PolicyKind::HeuristicIndex)
        {
            return Err(Error::Config(format!("policy `{name}` cannot learn")));
        }
        Ok(parsed)
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind_name())?;
        match self.learning {
            Learning::Off => Ok(()),
            Learning::Mle => f.write_str("_mle"),
            Learning::EwMle { .. } => f.write_str("_ewmle"),
        }
    }
}

/// Apply one slot of ACK feedback: transmitted channels reset to age 1 with
/// the observed occupancy, all others age by one slot.
pub fn update_beliefs(
    beliefs: &mut [BeliefState],
    decision: &Decision,
    observations: &[(usize, Occupancy)],
) -> Result<()> {
    for &(ch, _) in observations {
        if !decision.contains(ch) {
            return Err(Error::UnexpectedObservation(ch));
        }
    }
    for b in beliefs.iter_mut() {
        b.age = b.age.saturating_add(1);
    }
    for &(ch, occ) in observations {
        beliefs[ch] = BeliefState {
            last_observed: occ,
            age: 1,
        };
    }
    Ok(())
}

/// Index function for the decoupled index policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexRule {
    Whittle,
    Heuristic,
}

impl IndexRule {
    pub fn index(&self, belief: BeliefState, params: ChannelParams) -> IndexValue {
        match self {
            IndexRule::Whittle => whittle_index(belief.last_observed, belief.age, params),
            IndexRule::Heuristic => heuristic_index(belief.last_observed, belief.age, params),
        }
    }
}

/// Higher index first, then lower age, then lower channel id.
fn rank(a: &(IndexValue, u32, usize), b: &(IndexValue, u32, usize)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// The `budget` best-ranked channels, in rank order.
fn top_ranked(
    mut ranked: Vec<(IndexValue, u32, usize)>,
    budget: usize,
) -> Vec<(IndexValue, u32, usize)> {
    let budget = budget.min(ranked.len());
    if budget == 0 {
        return Vec::new();
    }
    if budget < ranked.len() {
        ranked.select_nth_unstable_by(budget - 1, rank);
        ranked.truncate(budget);
    }
    ranked.sort_unstable_by(rank);
    ranked
}

/// Index scheduling with the threshold gate.
///
/// Channels are ranked by `rule`; of the top `budget`, a channel last seen
/// free always transmits and one last seen occupied transmits only when its
/// age has reached its threshold.
pub fn decide_index(
    beliefs: &[BeliefState],
    params: &[ChannelParams],
    thresholds: &[Threshold],
    rule: IndexRule,
    budget: usize,
) -> Decision {
    gated_top(beliefs, thresholds, budget, |ch, b| {
        rule.index(b, params[ch])
    })
}

fn gated_top(
    beliefs: &[BeliefState],
    thresholds: &[Threshold],
    budget: usize,
    index: impl Fn(usize, BeliefState) -> IndexValue,
) -> Decision {
    let ranked = beliefs
        .iter()
        .enumerate()
        .map(|(ch, &b)| (index(ch, b), b.age, ch))
        .collect();
    let chosen = top_ranked(ranked, budget)
        .into_iter()
        .filter(|&(_, _, ch)| {
            let b = beliefs[ch];
            b.last_observed.is_free() || thresholds[ch].permits(b.age)
        })
        .map(|(_, _, ch)| ch)
        .collect();
    Decision::new(chosen)
}

/// `budget` distinct channels drawn uniformly at random.
pub fn decide_pure_random<R: Rng + ?Sized>(
    channels: usize,
    budget: usize,
    rng: &mut R,
) -> Decision {
    let budget = budget.min(channels);
    Decision::new(index::sample(rng, channels, budget).into_vec())
}

/// Rank by the correlated-band index (no threshold gate) and transmit on
/// the top `budget` channels.
pub fn decide_correlated(
    beliefs: &[BeliefState],
    band: &BandBelief,
    band_width: usize,
    budget: usize,
) -> Decision {
    let ranked = beliefs
        .iter()
        .enumerate()
        .map(|(ch, b)| {
            let idx = correlated_index(ch + 1, b.last_observed.is_occupied(), band, band_width);
            (idx, b.age, ch)
        })
        .collect();
    Decision::new(
        top_ranked(ranked, budget)
            .into_iter()
            .map(|(_, _, ch)| ch)
            .collect(),
    )
}

/// Check Empty + Random: stay on channels that were free, redraw the ones
/// that collided.
#[derive(Debug, Clone, Default)]
pub struct CheckEmptyState {
    held: Vec<usize>,
}

impl CheckEmptyState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn held(&self) -> &[usize] {
        &self.held
    }

    /// `last_outcomes` are the observations from the previous slot for the
    /// held channels. Held channels that collided, and any unfilled slot,
    /// are replaced by a uniform draw from channels neither kept nor already
    /// drawn this slot.
    pub fn decide<R: Rng + ?Sized>(
        &mut self,
        last_outcomes: &[(usize, Occupancy)],
        channels: usize,
        budget: usize,
        rng: &mut R,
    ) -> Decision {
        let budget = budget.min(channels);
        let collided = |ch: usize| {
            last_outcomes
                .iter()
                .any(|&(c, occ)| c == ch && occ.is_occupied())
        };

        let mut blocked = vec![false; channels];
        let mut slots: Vec<Option<usize>> = self
            .held
            .iter()
            .map(|&ch| (!collided(ch)).then_some(ch))
            .collect();
        slots.resize(budget, None);
        for ch in slots.iter().flatten() {
            blocked[*ch] = true;
        }

        let mut candidates = Vec::with_capacity(channels);
        for slot in slots.iter_mut().filter(|s| s.is_none()) {
            candidates.clear();
            candidates.extend((0..channels).filter(|&c| !blocked[c]));
            let pick = candidates[rng.random_range(0..candidates.len())];
            blocked[pick] = true;
            *slot = Some(pick);
        }
        self.held = slots.into_iter().flatten().collect();
        Decision::new(self.held.clone())
    }
}

/// Free-standing form of [`CheckEmptyState::decide`].
pub fn decide_check_empty<R: Rng + ?Sized>(
    state: &mut CheckEmptyState,
    last_outcomes: &[(usize, Occupancy)],
    channels: usize,
    budget: usize,
    rng: &mut R,
) -> Decision {
    state.decide(last_outcomes, channels, budget, rng)
}

/// Ages covered by the cached index tables of an [`IndexModel`].
const TABLE_AGES: usize = 2048;

/// Per-channel flip probabilities and gate thresholds used by the index
/// policies. Thresholds are recomputed only when a channel's `q` moves by
/// more than [`THRESHOLD_REFRESH`] since the last computation.
///
/// While no `q` has changed, occupied-state index values are tabulated per
/// channel for ages up to 2048.
#[derive(Debug, Clone)]
pub struct IndexModel {
    pub params: Vec<ChannelParams>,
    pub thresholds: Vec<Threshold>,
    threshold_q: Vec<f64>,
    cost: f64,
    fixed: bool,
    /// Tables for the Whittle and heuristic rules.
    tables: [Option<Vec<Vec<IndexValue>>>; 2],
}

impl IndexModel {
    pub fn new(params: Vec<ChannelParams>, gate_cost: f64) -> Self {
        let thresholds = params
            .iter()
            .map(|&p| optimal_threshold(p, gate_cost))
            .collect();
        let threshold_q = params.iter().map(|p| p.q()).collect();
        Self {
            params,
            thresholds,
            threshold_q,
            cost: gate_cost,
            fixed: true,
            tables: [None, None],
        }
    }

    pub fn set_q(&mut self, channel: usize, params: ChannelParams) {
        if params == self.params[channel] {
            return;
        }
        self.params[channel] = params;
        self.fixed = false;
        self.tables = [None, None];
        if (params.q() - self.threshold_q[channel]).abs() > THRESHOLD_REFRESH {
            self.thresholds[channel] = optimal_threshold(params, self.cost);
            self.threshold_q[channel] = params.q();
        }
    }

    pub fn decide(&mut self, beliefs: &[BeliefState], rule: IndexRule, budget: usize) -> Decision {
        if !self.fixed {
            return decide_index(beliefs, &self.params, &self.thresholds, rule, budget);
        }
        let slot = match rule {
            IndexRule::Whittle => 0,
            IndexRule::Heuristic => 1,
        };
        if self.tables[slot].is_none() {
            let tables = self
                .params
                .iter()
                .map(|&p| {
                    (1..=TABLE_AGES as u32)
                        .map(|age| {
                            rule.index(
                                BeliefState {
                                    last_observed: Occupancy::Occupied,
                                    age,
                                },
                                p,
                            )
                        })
                        .collect()
                })
                .collect();
            self.tables[slot] = Some(tables);
        }
        let tables = self.tables[slot].as_ref().expect("tables built above");
        let params = &self.params;
        gated_top(beliefs, &self.thresholds, budget, |ch, b| {
            match tables[ch].get(b.age as usize - 1) {
                Some(&v) if b.last_observed.is_occupied() => v,
                _ => rule.index(b, params[ch]),
            }
        })
    }
}

/// Online flip-probability estimates from consecutive-slot observations.
#[derive(Debug, Clone)]
pub struct TransitionLearner {
    counts: Vec<TransitionCounts>,
    last_seen: Vec<Option<(u32, Occupancy)>>,
    prior: f64,
}

impl TransitionLearner {
    pub fn new(channels: usize, kind: EstimatorKind, prior: f64) -> Self {
        Self {
            counts: vec![kind.counts(); channels],
            last_seen: vec![None; channels],
            prior,
        }
    }

    /// Record what a transmission in `slot` revealed; counts a transition
    /// when the same channel was also observed in `slot − 1`.
    pub fn observe(&mut self, slot: u32, channel: usize, occupancy: Occupancy) {
        if let Some((prev_slot, prev)) = self.last_seen[channel] {
            if prev_slot + 1 == slot {
                self.counts[channel].record(prev, occupancy);
            }
        }
        self.last_seen[channel] = Some((slot, occupancy));
    }

    /// Close the slot for every channel's window.
    pub fn end_slot(&mut self) {
        for c in &mut self.counts {
            c.advance_window();
        }
    }

    pub fn estimate(&self, channel: usize) -> f64 {
        self.counts[channel].estimate(self.prior)
    }

    pub fn counts(&self, channel: usize) -> &TransitionCounts {
        &self.counts[channel]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::IndependentWorld;
    use crate::markov::Occupancy::{Free, Occupied};
    use crate::rng_from_seed;
    use crate::single_channel::effective_cost;
    use proptest::prelude::*;

    fn belief(last: Occupancy, age: u32) -> BeliefState {
        BeliefState {
            last_observed: last,
            age,
        }
    }

    fn params(qs: &[f64]) -> Vec<ChannelParams> {
        qs.iter().map(|&q| ChannelParams::new(q).unwrap()).collect()
    }

    #[test]
    fn belief_update_examples() {
        let mut b = vec![belief(Occupied, 3), belief(Occupied, 5), belief(Free, 1)];
        let d = Decision::new(vec![1, 2]);
        update_beliefs(&mut b, &d, &[(1, Free), (2, Free)]).unwrap();
        assert_eq!(b[0], belief(Occupied, 4));
        assert_eq!(b[1], belief(Free, 1));
        assert_eq!(b[2], belief(Free, 1));
    }

    #[test]
    fn belief_update_rejects_foreign_observation() {
        let mut b = vec![BeliefState::default(); 3];
        let d = Decision::new(vec![0]);
        assert!(matches!(
            update_beliefs(&mut b, &d, &[(2, Free)]),
            Err(Error::UnexpectedObservation(2))
        ));
    }

    #[test]
    fn all_free_picks_lowest_ages() {
        let beliefs = vec![
            belief(Free, 4),
            belief(Free, 2),
            belief(Free, 9),
            belief(Free, 2),
        ];
        let p = params(&[0.1, 0.2, 0.3, 0.4]);
        let mut model = IndexModel::new(p, 0.3);
        let d = model.decide(&beliefs, IndexRule::Whittle, 2);
        assert_eq!(d.transmit, vec![1, 3]);
    }

    #[test]
    fn older_occupied_channel_ranks_first() {
        let beliefs = vec![belief(Occupied, 1), belief(Occupied, 9)];
        let gamma = 0.5;
        let cost = effective_cost(gamma, 0.0);
        let mut model = IndexModel::new(params(&[0.3, 0.3]), cost);
        let d = model.decide(&beliefs, IndexRule::Whittle, 1);
        let h = optimal_threshold(ChannelParams::new(0.3).unwrap(), cost);
        if h.permits(9) {
            assert_eq!(d.transmit, vec![1]);
        } else {
            assert!(d.is_empty());
        }
        // Gate off (γ = 0): threshold 1, the top channel always transmits.
        let mut model = IndexModel::new(params(&[0.3, 0.3]), 0.0);
        assert_eq!(
            model.decide(&beliefs, IndexRule::Whittle, 1).transmit,
            vec![1]
        );
    }

    #[test]
    fn zero_penalty_fills_budget() {
        let beliefs = vec![belief(Occupied, 1); 6];
        let mut model = IndexModel::new(params(&[0.05, 0.1, 0.2, 0.3, 0.4, 0.45]), 0.0);
        for rule in [IndexRule::Whittle, IndexRule::Heuristic] {
            assert_eq!(model.decide(&beliefs, rule, 4).len(), 4);
        }
    }

    #[test]
    fn heavy_penalty_never_retries_occupied() {
        // D = γ/(1+γ) above 1/(1+2q) for every channel.
        let qs = [0.1, 0.2, 0.3, 0.4];
        let gamma = 20.0;
        let cost = effective_cost(gamma, 0.0);
        assert!(qs.iter().all(|q| cost > 1.0 / (1.0 + 2.0 * q)));
        let mut model = IndexModel::new(params(&qs), cost);
        for age in [1, 10, 1000, 100_000] {
            let beliefs = vec![belief(Occupied, age); 4];
            assert!(model.decide(&beliefs, IndexRule::Whittle, 4).is_empty());
            assert!(model.decide(&beliefs, IndexRule::Heuristic, 4).is_empty());
        }
    }

    #[test]
    fn pure_random_examples() {
        let mut rng = rng_from_seed(1);
        assert_eq!(
            decide_pure_random(5, 5, &mut rng).transmit,
            vec![0, 1, 2, 3, 4]
        );

        let (n, l, slots) = (32, 4, 100_000);
        let mut hits = vec![0u32; n];
        for _ in 0..slots {
            let d = decide_pure_random(n, l, &mut rng);
            assert_eq!(d.len(), l);
            for ch in d.transmit {
                hits[ch] += 1;
            }
        }
        for h in hits {
            assert!((h as f64 / slots as f64 - 0.125).abs() < 0.005);
        }

        let mut first = 0;
        for _ in 0..10_000 {
            if decide_pure_random(2, 1, &mut rng).transmit == vec![0] {
                first += 1;
            }
        }
        assert!((first as f64 / 10_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn check_empty_keeps_successes() {
        let mut rng = rng_from_seed(2);
        let mut state = CheckEmptyState::new();
        let d0 = state.decide(&[], 10, 3, &mut rng);
        assert_eq!(d0.len(), 3);
        let ok: Vec<_> = d0.transmit.iter().map(|&c| (c, Free)).collect();
        let d1 = state.decide(&ok, 10, 3, &mut rng);
        assert_eq!(d0, d1);

        let bad: Vec<_> = d1.transmit.iter().map(|&c| (c, Occupied)).collect();
        let d2 = state.decide(&bad, 10, 3, &mut rng);
        assert_eq!(d2.len(), 3);

        let mut full = CheckEmptyState::new();
        let all = full.decide(&[], 4, 4, &mut rng);
        for _ in 0..20 {
            let obs: Vec<_> = all.transmit.iter().map(|&c| (c, Occupied)).collect();
            assert_eq!(full.decide(&obs, 4, 4, &mut rng), all);
        }
    }

    #[test]
    fn check_empty_replaces_only_collisions() {
        let mut rng = rng_from_seed(3);
        let mut state = CheckEmptyState::new();
        let d0 = state.decide(&[], 20, 4, &mut rng);
        let obs = vec![
            (d0.transmit[0], Free),
            (d0.transmit[1], Occupied),
            (d0.transmit[2], Free),
            (d0.transmit[3], Occupied),
        ];
        let d1 = state.decide(&obs, 20, 4, &mut rng);
        assert_eq!(d1.len(), 4);
        assert!(d1.contains(d0.transmit[0]) && d1.contains(d0.transmit[2]));
    }

    #[test]
    fn correlated_examples() {
        let band = BandBelief::new(16, 0.5, crate::indices::MeanAgeMode::AllChannels);
        let frees: Vec<_> = (0..16)
            .map(|i| belief(Free, 1 + (i as u32 * 7) % 5))
            .collect();
        let d = decide_correlated(&frees, &band, 12, 3);
        let mut by_age: Vec<_> = (0..16).collect();
        by_age.sort_by_key(|&c| (frees[c].age, c));
        let mut expect = by_age[..3].to_vec();
        expect.sort();
        assert_eq!(d.transmit, expect);

        // Positions 5 and 11 are equidistant from a center of 8.
        let mut b = BandBelief::new(16, 0.5, crate::indices::MeanAgeMode::AllChannels);
        b.center_estimate = 8.0;
        let i5 = correlated_index(5, true, &b, 12);
        let i11 = correlated_index(11, true, &b, 12);
        assert!((i5.value() - i11.value()).abs() < 1e-12);

        // Distance 10 beats distance 1.
        let mut b = BandBelief::new(32, 0.5, crate::indices::MeanAgeMode::AllChannels);
        b.center_estimate = 10.0;
        let far = correlated_index(20, true, &b, 12);
        let near = correlated_index(11, true, &b, 12);
        assert!(far > near);
    }

    #[test]
    fn parse_and_label() {
        let s = PolicySpec::parse("whittle_ewmle", 0.5, (1000, 0.5)).unwrap();
        assert_eq!(s.kind, PolicyKind::WhittleIndex);
        assert_eq!(
            s.learning,
            Learning::EwMle {
                window_length: 1000,
                forgetting: 0.5
            }
        );
        assert_eq!(s.to_string(), "whittle_ewmle");
        assert_eq!(
            PolicySpec::parse("heuristic_mle", 0.5, (1, 1.0))
                .unwrap()
                .to_string(),
            "heuristic_mle"
        );
        assert!(PolicySpec::parse("pure_random_mle", 0.5, (1, 1.0)).is_err());
        assert!(PolicySpec::parse("bogus", 0.5, (1, 1.0)).is_err());
        assert!(PolicySpec::new(PolicyKind::CorrelatedHeuristic, 0.5)
            .validate(false)
            .is_err());
        assert!(PolicySpec::new(PolicyKind::CorrelatedHeuristic, 0.5)
            .validate(true)
            .is_ok());
    }

    #[test]
    fn learner_counts_only_consecutive_observations() {
        let mut l = TransitionLearner::new(2, EstimatorKind::Mle, 0.3);
        l.observe(0, 0, Free);
        l.observe(1, 0, Occupied);
        l.observe(3, 0, Free);
        l.observe(4, 0, Free);
        assert_eq!(l.counts(0).n01, 1);
        assert_eq!(l.counts(0).n00, 1);
        assert_eq!(l.estimate(0), 0.5 - 1e-4);
        assert_eq!(l.estimate(1), 0.3);
    }

    // Runs the index scheduler on an independent world, optionally feeding
    // the true q back through `set_q` every slot as a learner would.
    fn decisions(feed_true_q: bool) -> Vec<Decision> {
        let qs = [0.1, 0.15, 0.2, 0.3, 0.35, 0.45];
        let mut rng = rng_from_seed(77);
        let mut world = IndependentWorld::new(params(&qs), &mut rng);
        let mut model = IndexModel::new(params(&qs), effective_cost(0.5, 0.0));
        let mut beliefs = vec![BeliefState::default(); qs.len()];
        let mut out = Vec::new();
        for t in 0..3000 {
            if feed_true_q {
                for (ch, &q) in qs.iter().enumerate() {
                    model.set_q(ch, ChannelParams::new(q).unwrap());
                }
            }
            let d = model.decide(&beliefs, IndexRule::Whittle, 2);
            let obs: Vec<_> = d
                .transmit
                .iter()
                .map(|&c| (c, world.occupancy[c]))
                .collect();
            world.step(t, &mut rng);
            update_beliefs(&mut beliefs, &d, &obs).unwrap();
            out.push(d);
        }
        out
    }

    #[test]
    fn oracle_fed_learning_matches_known_q() {
        assert_eq!(decisions(false), decisions(true));
    }

    proptest! {
        #[test]
        fn index_policies_respect_budget(
            seed in 0u64..1000,
            budget in 1usize..6,
            gamma in 0.0f64..3.0,
        ) {
            let qs = [0.05, 0.1, 0.2, 0.25, 0.3, 0.4, 0.45, 0.49];
            let mut rng = rng_from_seed(seed);
            let mut world = IndependentWorld::new(params(&qs), &mut rng);
            let mut model = IndexModel::new(params(&qs), effective_cost(gamma, 0.0));
            let mut beliefs = vec![BeliefState::default(); qs.len()];
            let mut last_tx: Vec<Option<u32>> = vec![None; qs.len()];
            for t in 0..400u32 {
                for rule in [IndexRule::Whittle, IndexRule::Heuristic] {
                    prop_assert!(model.decide(&beliefs, rule, budget).len() <= budget);
                }
                let d = model.decide(&beliefs, IndexRule::Whittle, budget);
                let obs: Vec<_> = d.transmit.iter().map(|&c| (c, world.occupancy[c])).collect();
                world.step(t, &mut rng);
                update_beliefs(&mut beliefs, &d, &obs).unwrap();
                for &c in &d.transmit {
                    last_tx[c] = Some(t);
                }
                // Slots since the last transmission; untouched channels
                // started one slot old.
                for c in 0..qs.len() {
                    let expect = match last_tx[c] {
                        Some(s) => t - s + 1,
                        None => t + 2,
                    };
                    prop_assert_eq!(beliefs[c].age, expect);
                }
            }
        }

        #[test]
        fn cached_tables_match_direct_evaluation(
            ages in prop::collection::vec(1u32..3000, 6),
            free in prop::collection::vec(any::<bool>(), 6),
            budget in 1usize..6,
        ) {
            let qs = [0.05, 0.12, 0.2, 0.27, 0.33, 0.41];
            let p = params(&qs);
            let beliefs: Vec<_> = (0..6)
                .map(|i| belief(if free[i] { Free } else { Occupied }, ages[i]))
                .collect();
            let mut model = IndexModel::new(p.clone(), 0.3);
            for rule in [IndexRule::Whittle, IndexRule::Heuristic] {
                let direct = decide_index(&beliefs, &p, &model.thresholds.clone(), rule, budget);
                prop_assert_eq!(model.decide(&beliefs, rule, budget), direct);
            }
        }

        #[test]
        fn permutation_equivariance(perm_seed in 0u64..500, budget in 1usize..5) {
            let qs = [0.05, 0.12, 0.2, 0.27, 0.33, 0.41];
            let ages = [3u32, 1, 7, 2, 5, 4];
            let lasts = [Occupied, Free, Occupied, Occupied, Free, Occupied];
            let mut perm: Vec<usize> = (0..qs.len()).collect();
            let mut rng = rng_from_seed(perm_seed);
            use rand::seq::SliceRandom;
            perm.shuffle(&mut rng);

            let beliefs: Vec<_> = (0..6).map(|i| belief(lasts[i], ages[i])).collect();
            let mut model = IndexModel::new(params(&qs), effective_cost(0.5, 0.0));
            let base = model.decide(&beliefs, IndexRule::Whittle, budget);

            // Channel i moves to slot perm[i].
            let mut pq = vec![0.0; 6];
            let mut pb = vec![BeliefState::default(); 6];
            for i in 0..6 {
                pq[perm[i]] = qs[i];
                pb[perm[i]] = beliefs[i];
            }
            let mut pmodel = IndexModel::new(params(&pq), effective_cost(0.5, 0.0));
            let moved = pmodel.decide(&pb, IndexRule::Whittle, budget);
            let mapped = Decision::new(base.transmit.iter().map(|&c| perm[c]).collect());
            // Ages and q are distinct here so no ties involve channel ids.
            prop_assert_eq!(mapped, moved);
        }
    }
}
