//! Ready-made configurations for the standard figures.
//!
//! | figure | world | sweep |
//! |---|---|---|
//! | 3 | independent, N = 32 | L |
//! | 4 | independent, N = 32, L = 4 | q_max |
//! | 5 | independent, L = N/4 | N |
//! | 6 | independent, stationary learning | L |
//! | 7 | independent, drifting q with EW-MLE | L |
//! | 8 | band, N = 16, B = 12, σ = 1 | L |
//! | 9 | band, L = 4 | σ |

use super::config::{ExperimentConfig, ScheduleKind, SweepVariable, WorldKind};
use crate::error::{Error, Result};

pub const FIGURES: std::ops::RangeInclusive<u32> = 3..=9;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

const BASELINES: [&str; 2] = ["pure_random", "check_empty_random"];

pub fn figure(number: u32) -> Result<ExperimentConfig> {
    let base = ExperimentConfig {
        n: 32,
        l: 4,
        horizon: 30_000,
        runs: 100,
        gamma: 0.5,
        q_min: 0.1,
        q_max: 0.5,
        ..ExperimentConfig::default()
    };
    let known = names(&[BASELINES[0], BASELINES[1], "whittle", "heuristic"]);
    let l_sweep = vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0];
    let band = ExperimentConfig {
        world: WorldKind::Band,
        n: 16,
        band_width: 12,
        sigma: 1.0,
        policies: names(&[BASELINES[0], BASELINES[1], "correlated_heuristic"]),
        ..base.clone()
    };

    let cfg = match number {
        3 => ExperimentConfig {
            policies: known,
            sweep_variable: Some(SweepVariable::L),
            sweep_values: l_sweep,
            ..base
        },
        4 => ExperimentConfig {
            policies: known,
            sweep_variable: Some(SweepVariable::QMax),
            sweep_values: vec![0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
            ..base
        },
        5 => ExperimentConfig {
            policies: known,
            l_fraction: Some(0.25),
            sweep_variable: Some(SweepVariable::N),
            sweep_values: vec![8.0, 16.0, 32.0, 64.0],
            ..base
        },
        6 => ExperimentConfig {
            policies: names(&[
                BASELINES[0],
                BASELINES[1],
                "whittle",
                "heuristic",
                "whittle_mle",
                "heuristic_mle",
            ]),
            sweep_variable: Some(SweepVariable::L),
            sweep_values: l_sweep,
            ..base
        },
        7 => ExperimentConfig {
            policies: names(&[
                BASELINES[0],
                BASELINES[1],
                "whittle",
                "heuristic",
                "whittle_ewmle",
                "heuristic_ewmle",
            ]),
            schedule: ScheduleKind::SplitRamp,
            sweep_variable: Some(SweepVariable::L),
            sweep_values: l_sweep,
            ..base
        },
        8 => ExperimentConfig {
            sweep_variable: Some(SweepVariable::L),
            sweep_values: vec![1.0, 2.0, 3.0, 4.0],
            ..band
        },
        9 => ExperimentConfig {
            sweep_variable: Some(SweepVariable::Sigma),
            sweep_values: vec![0.5, 1.0, 1.5, 2.0],
            ..band
        },
        n => {
            return Err(Error::Config(format!(
                "no preset for figure {n}; choose {}..={}",
                FIGURES.start(),
                FIGURES.end()
            )))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for n in FIGURES {
            figure(n).unwrap().validate().unwrap();
        }
        assert!(figure(2).is_err());
        assert!(figure(10).is_err());
    }

    #[test]
    fn figure_three_layout() {
        let cfg = figure(3).unwrap();
        assert_eq!(cfg.sweep_points().len(), 6);
        let s = cfg.scenario(Some(8.0)).unwrap();
        assert_eq!((s.n, s.l, s.horizon), (32, 8, 30_000));
        assert!((s.qs[0] - 0.1).abs() < 1e-15);
        assert!(s.qs[31] < 0.5);
    }
}
