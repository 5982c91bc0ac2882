//! Experiment configuration, read from flat TOML.
//!
//! ```toml
//! world = "independent"
//! n = 32
//! l = 4
//! horizon = 30000
//! runs = 100
//! base_seed = 1
//! gamma = 0.5
//! policies = ["pure_random", "check_empty_random", "whittle", "heuristic"]
//! q_min = 0.1
//! q_max = 0.5
//! sweep_variable = "L"
//! sweep_values = [1, 2, 4, 8]
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::environment::{split_ramp_schedules, QSchedule};
use crate::error::{Error, Result};
use crate::estimation::DEFAULT_PRIOR;
use crate::indices::MeanAgeMode;
use crate::scheduling::{PolicyKind, PolicySpec};

/// Largest flip probability used after clamping a configured `q ≥ 0.5`.
pub const MAX_CONFIG_Q: f64 = 0.5 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WorldKind {
    #[default]
    Independent,
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Stationary,
    /// First half of the channels ramp up by `ramp_amplitude` over the
    /// horizon, the rest ramp down.
    SplitRamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepVariable {
    L,
    #[serde(rename = "q_max")]
    QMax,
    N,
    #[serde(rename = "sigma")]
    Sigma,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::L => "L",
            SweepVariable::QMax => "q_max",
            SweepVariable::N => "N",
            SweepVariable::Sigma => "sigma",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AgeModeKey {
    #[default]
    All,
    Selected,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub world: WorldKind,
    /// Total channels N.
    pub n: usize,
    /// Channel budget L per slot.
    pub l: usize,
    /// When set, L follows N as `max(1, round(l_fraction · N))`.
    pub l_fraction: Option<f64>,
    pub horizon: u32,
    pub runs: u32,
    pub base_seed: u64,
    /// Collision penalty γ.
    pub gamma: f64,
    pub policies: Vec<String>,
    pub q_min: f64,
    pub q_max: f64,
    /// Explicit per-channel flip probabilities; overrides `q_min`/`q_max`.
    pub q_list: Option<Vec<f64>>,
    pub schedule: ScheduleKind,
    pub ramp_amplitude: f64,
    pub sweep_variable: Option<SweepVariable>,
    pub sweep_values: Vec<f64>,
    pub window_length: u32,
    pub forgetting: f64,
    pub prior_q: f64,
    pub band_width: usize,
    pub sigma: f64,
    pub alpha_memory: f64,
    pub band_age_mode: AgeModeKey,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            world: WorldKind::Independent,
            n: 32,
            l: 4,
            l_fraction: None,
            horizon: 30_000,
            runs: 100,
            base_seed: 0,
            gamma: 0.5,
            policies: vec![
                "pure_random".into(),
                "check_empty_random".into(),
                "whittle".into(),
                "heuristic".into(),
            ],
            q_min: 0.1,
            q_max: 0.5,
            q_list: None,
            schedule: ScheduleKind::Stationary,
            ramp_amplitude: 0.15,
            sweep_variable: None,
            sweep_values: Vec::new(),
            window_length: 1000,
            forgetting: 0.5,
            prior_q: DEFAULT_PRIOR,
            band_width: 12,
            sigma: 1.0,
            alpha_memory: 0.5,
            band_age_mode: AgeModeKey::All,
        }
    }
}

/// A configuration with any sweep value applied: everything one episode
/// needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub world: WorldKind,
    pub n: usize,
    pub l: usize,
    pub horizon: u32,
    pub gamma: f64,
    /// Initial flip probability of each channel (independent world only).
    pub qs: Vec<f64>,
    pub schedules: Option<Vec<QSchedule>>,
    pub prior_q: f64,
    pub band_width: usize,
    pub sigma: f64,
    pub alpha_memory: f64,
    pub age_mode: MeanAgeMode,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn policy_specs(&self) -> Result<Vec<PolicySpec>> {
        if self.policies.is_empty() {
            return Err(Error::Config("no policies configured".into()));
        }
        let band = self.world == WorldKind::Band;
        self.policies
            .iter()
            .map(|name| {
                let parsed = PolicySpec::parse(name, self.gamma, (self.window_length, self.forgetting))?;
                parsed.validate(band)?;
                let needs_q = matches!(parsed.kind, PolicyKind::WhittleIndex | PolicyKind::HeuristicIndex);
                if band && needs_q {
                    return Err(Error::Config(format!(
                        "policy `{name}` needs per-channel flip probabilities; use the independent world"
                    )));
                }
                Ok(parsed)
            })
            .collect()
    }

    /// Sweep points in configured order, or a single `None` without a sweep.
    pub fn sweep_points(&self) -> Vec<Option<f64>> {
        match self.sweep_variable {
            Some(_) => self.sweep_values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    /// Check everything, including every sweep point and policy.
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.sweep_variable.is_some() && self.sweep_values.is_empty() {
            return Err(Error::Config(
                "sweep_variable set without sweep_values".into(),
            ));
        }
        if self.sweep_variable.is_none() && !self.sweep_values.is_empty() {
            return Err(Error::Config(
                "sweep_values set without sweep_variable".into(),
            ));
        }
        self.policy_specs()?;
        let mut clamped = 0;
        for point in self.sweep_points() {
            self.scenario(point)?;
            clamped = clamped.max(self.clamped_count(point));
        }
        if clamped > 0 {
            log::warn!("{clamped} flip probabilities at 0.5 clamped to {MAX_CONFIG_Q}");
        }
        Ok(())
    }

    /// Resolve the configuration at one sweep value.
    pub fn scenario(&self, sweep_value: Option<f64>) -> Result<Scenario> {
        let mut cfg = self.clone();
        if let (Some(var), Some(v)) = (self.sweep_variable, sweep_value) {
            match var {
                SweepVariable::L => cfg.l = as_count(v, "L")?,
                SweepVariable::N => cfg.n = as_count(v, "N")?,
                SweepVariable::QMax => cfg.q_max = v,
                SweepVariable::Sigma => cfg.sigma = v,
            }
        }
        if let Some(frac) = cfg.l_fraction {
            if !(frac > 0.0 && frac <= 1.0) {
                return Err(Error::Config(format!(
                    "l_fraction must lie in (0, 1], got {frac}"
                )));
            }
            cfg.l = ((frac * cfg.n as f64).round() as usize).max(1);
        }
        cfg.resolved()
    }

    fn resolved(&self) -> Result<Scenario> {
        let cfg = self;
        if cfg.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if cfg.l == 0 || cfg.l > cfg.n {
            return Err(Error::Config(format!(
                "l = {} must lie in [1, n = {}]",
                cfg.l, cfg.n
            )));
        }
        if cfg.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !(cfg.gamma >= 0.0) || !cfg.gamma.is_finite() {
            return Err(Error::Config(format!(
                "gamma must be non-negative, got {}",
                cfg.gamma
            )));
        }
        if cfg.window_length == 0 {
            return Err(Error::Config("window_length must be at least 1".into()));
        }
        if !(cfg.forgetting > 0.0 && cfg.forgetting <= 1.0) {
            return Err(Error::Config(format!(
                "forgetting must lie in (0, 1], got {}",
                cfg.forgetting
            )));
        }
        if !(cfg.prior_q > 0.0 && cfg.prior_q < 0.5) {
            return Err(Error::Config(format!(
                "prior_q must lie in (0, 0.5), got {}",
                cfg.prior_q
            )));
        }
        if !(0.0..=1.0).contains(&cfg.alpha_memory) {
            return Err(Error::Config(format!(
                "alpha_memory must lie in [0, 1], got {}",
                cfg.alpha_memory
            )));
        }

        let (qs, schedules) = match cfg.world {
            WorldKind::Independent => {
                let qs = cfg.channel_qs()?;
                let schedules = match cfg.schedule {
                    ScheduleKind::Stationary => None,
                    ScheduleKind::SplitRamp => {
                        if !(cfg.ramp_amplitude >= 0.0) {
                            return Err(Error::Config(format!(
                                "ramp_amplitude must be non-negative, got {}",
                                cfg.ramp_amplitude
                            )));
                        }
                        Some(split_ramp_schedules(&qs, cfg.horizon, cfg.ramp_amplitude)?)
                    }
                };
                (qs, schedules)
            }
            WorldKind::Band => {
                if cfg.band_width == 0 || cfg.band_width > cfg.n {
                    return Err(Error::Config(format!(
                        "band_width = {} must lie in [1, n = {}]",
                        cfg.band_width, cfg.n
                    )));
                }
                if !(cfg.sigma > 0.0) || !cfg.sigma.is_finite() {
                    return Err(Error::Config(format!(
                        "sigma must be positive, got {}",
                        cfg.sigma
                    )));
                }
                (Vec::new(), None)
            }
        };

        Ok(Scenario {
            world: cfg.world,
            n: cfg.n,
            l: cfg.l,
            horizon: cfg.horizon,
            gamma: cfg.gamma,
            qs,
            schedules,
            prior_q: cfg.prior_q,
            band_width: cfg.band_width,
            sigma: cfg.sigma,
            alpha_memory: cfg.alpha_memory,
            age_mode: match cfg.band_age_mode {
                AgeModeKey::All => MeanAgeMode::AllChannels,
                AgeModeKey::Selected => MeanAgeMode::Selected,
            },
        })
    }

    /// `q_i = q_min + (i−1)(q_max − q_min)/(N−1)` or the explicit list,
    /// with values at or above 0.5 pulled just below it.
    fn channel_qs(&self) -> Result<Vec<f64>> {
        let raw = match &self.q_list {
            Some(list) => {
                if list.len() != self.n {
                    return Err(Error::Config(format!(
                        "q_list has {} entries for n = {}",
                        list.len(),
                        self.n
                    )));
                }
                list.clone()
            }
            None => {
                if self.q_min > self.q_max {
                    return Err(Error::Config(format!(
                        "q_min = {} exceeds q_max = {}",
                        self.q_min, self.q_max
                    )));
                }
                if self.n == 1 {
                    vec![self.q_min]
                } else {
                    let step = (self.q_max - self.q_min) / (self.n - 1) as f64;
                    let mut qs: Vec<f64> =
                        (0..self.n).map(|i| self.q_min + i as f64 * step).collect();
                    qs[self.n - 1] = self.q_max;
                    qs
                }
            }
        };
        raw.into_iter()
            .map(|q| {
                if !(q > 0.0) || !q.is_finite() || q > 0.5 {
                    return Err(Error::Config(format!(
                        "flip probability {q} outside (0, 0.5]"
                    )));
                }
                Ok(q.min(MAX_CONFIG_Q))
            })
            .collect()
    }

    /// Configured flip probabilities that will be pulled below 0.5.
    fn clamped_count(&self, sweep_value: Option<f64>) -> usize {
        let mut cfg = self.clone();
        if let (Some(SweepVariable::QMax), Some(v)) = (self.sweep_variable, sweep_value) {
            cfg.q_max = v;
        }
        match (&cfg.q_list, cfg.world) {
            (_, WorldKind::Band) => 0,
            (Some(list), _) => list
                .iter()
                .filter(|&&q| q > MAX_CONFIG_Q && q <= 0.5)
                .count(),
            (None, _) => usize::from(cfg.q_max > MAX_CONFIG_Q && cfg.q_max <= 0.5),
        }
    }
}

fn as_count(v: f64, name: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!(
            "{name} sweep value {v} is not a positive integer"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_file() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml_str("n = 4\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn evenly_spaced_qs_with_clamp() {
        let cfg = ExperimentConfig {
            n: 5,
            l: 1,
            ..Default::default()
        };
        let s = cfg.scenario(None).unwrap();
        let expect = [0.1, 0.2, 0.3, 0.4, MAX_CONFIG_Q];
        for (q, e) in s.qs.iter().zip(expect) {
            assert!((q - e).abs() < 1e-15);
        }
    }

    #[test]
    fn sweep_values_are_applied() {
        let cfg =
            ExperimentConfig::from_toml_str("sweep_variable = \"L\"\nsweep_values = [1, 2, 40]\n")
                .unwrap();
        assert_eq!(cfg.scenario(Some(2.0)).unwrap().l, 2);
        // L = 40 > N = 32.
        assert!(cfg.validate().is_err());

        let cfg = ExperimentConfig::from_toml_str(
            "sweep_variable = \"N\"\nsweep_values = [8, 16]\nl_fraction = 0.25\n",
        )
        .unwrap();
        let s = cfg.scenario(Some(16.0)).unwrap();
        assert_eq!((s.n, s.l), (16, 4));
        assert!(cfg.scenario(Some(2.5)).is_err());
    }

    #[test]
    fn invalid_values_fail_fast() {
        for text in [
            "runs = 0",
            "l = 0",
            "horizon = 0",
            "gamma = -1.0",
            "q_list = [0.1, 0.2]",
            "q_min = 0.0",
            "policies = []",
            "policies = [\"nope\"]",
            "policies = [\"correlated_heuristic\"]",
            "world = \"band\"\npolicies = [\"whittle\"]\nn = 16",
            "world = \"band\"\nn = 16\nband_width = 20",
            "forgetting = 0.0",
            "sweep_variable = \"sigma\"",
        ] {
            let cfg = ExperimentConfig::from_toml_str(text).unwrap();
            assert!(cfg.validate().is_err(), "accepted: {text}");
        }
    }

    #[test]
    fn band_config() {
        let cfg = ExperimentConfig::from_toml_str(
            "world = \"band\"\nn = 16\npolicies = [\"pure_random\", \"correlated_heuristic\"]\n\
             band_age_mode = \"selected\"\n",
        )
        .unwrap();
        cfg.validate().unwrap();
        let s = cfg.scenario(None).unwrap();
        assert_eq!(s.age_mode, MeanAgeMode::Selected);
        assert!(s.qs.is_empty());
    }

    #[test]
    fn split_ramp_builds_schedules() {
        let cfg =
            ExperimentConfig::from_toml_str("schedule = \"split_ramp\"\nn = 4\nl = 1").unwrap();
        let s = cfg.scenario(None).unwrap();
        let sched = s.schedules.unwrap();
        assert!(sched[0].is_increasing() && sched[1].is_increasing());
        assert!(!sched[2].is_increasing() && !sched[3].is_increasing());
    }
}
