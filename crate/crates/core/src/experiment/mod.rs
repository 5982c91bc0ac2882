//! Seeded multi-run experiments, parameter sweeps and CSV output.

pub mod config;
pub mod episode;
pub mod oracle;
pub mod presets;

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

pub use config::{ExperimentConfig, Scenario, SweepVariable, WorldKind};
pub use episode::{run_episode, RunMetrics};

use crate::error::{Error, Result};

/// Environment variable that fixes the number of worker threads.
pub const WORKERS_ENV: &str = "SPECTRUM_ACCESS_WORKERS";

pub const CSV_HEADER: &str = "sweep_var,sweep_value,policy,runs,mean_throughput,std_throughput,\
mean_collision_rate,std_collision_rate,mean_collision_per_attempt,mean_objective,mean_attempt_fraction";

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine two partial summaries.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 =
            self.m2 + other.m2 + delta * delta * (self.count * other.count) as f64 / count as f64;
        Moments { count, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation; 0 with fewer than two values.
    pub fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

/// Aggregate of one (sweep value, policy) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_var: Option<SweepVariable>,
    pub sweep_value: Option<f64>,
    pub policy: String,
    pub runs: u32,
    pub throughput: Moments,
    pub collision_rate: Moments,
    pub collision_per_attempt: Moments,
    pub objective: Moments,
    pub attempt_fraction: Moments,
}

impl Row {
    fn new(sweep_var: Option<SweepVariable>, sweep_value: Option<f64>, policy: String) -> Self {
        Self {
            sweep_var,
            sweep_value,
            policy,
            runs: 0,
            throughput: Moments::default(),
            collision_rate: Moments::default(),
            collision_per_attempt: Moments::default(),
            objective: Moments::default(),
            attempt_fraction: Moments::default(),
        }
    }

    fn push(&mut self, m: &RunMetrics) {
        self.runs += 1;
        self.throughput.push(m.normalized_throughput());
        self.collision_rate.push(m.collision_rate());
        self.collision_per_attempt.push(m.collision_per_attempt());
        self.objective.push(m.objective());
        self.attempt_fraction.push(m.attempt_fraction());
    }
}

/// All rows of an experiment, ordered by sweep value then policy as
/// configured.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn row(&self, sweep_value: Option<f64>, policy: &str) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.policy == policy)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let var = r
                .sweep_var
                .map_or_else(|| "none".to_string(), |v| v.to_string());
            let value = r.sweep_value.map_or_else(String::new, format_g9);
            let _ = writeln!(
                out,
                "{var},{value},{},{},{},{},{},{},{},{},{}",
                r.policy,
                r.runs,
                format_g9(r.throughput.mean()),
                format_g9(r.throughput.std()),
                format_g9(r.collision_rate.mean()),
                format_g9(r.collision_rate.std()),
                format_g9(r.collision_per_attempt.mean()),
                format_g9(r.objective.mean()),
                format_g9(r.attempt_fraction.mean()),
            );
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Format with 9 significant digits, like C's `%.9g`.
pub fn format_g9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Run every (sweep value, policy, run) episode and aggregate.
///
/// Run `k` uses seed `base_seed + k`. Episodes are spread over `workers`
/// threads (or [`WORKERS_ENV`], or all cores); results are folded in run
/// order so the table does not depend on the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<ResultTable> {
    config.validate()?;
    let policies = config.policy_specs()?;
    let points = config.sweep_points();
    let scenarios = points
        .iter()
        .map(|&p| config.scenario(p))
        .collect::<Result<Vec<_>>>()?;

    let runs = config.runs as usize;
    let tasks: Vec<(usize, usize, u64)> = (0..scenarios.len())
        .flat_map(|s| {
            (0..policies.len()).flat_map(move |p| (0..runs).map(move |r| (s, p, r as u64)))
        })
        .collect();

    let workers = match workers {
        Some(w) => Some(w),
        None => workers_from_env()?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let results: Vec<RunMetrics> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(s, p, r)| {
                run_episode(
                    &scenarios[s],
                    &policies[p],
                    config.base_seed.wrapping_add(r),
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::with_capacity(scenarios.len() * policies.len());
    for (chunk, &(s, p, _)) in results.chunks(runs).zip(tasks.iter().step_by(runs)) {
        let mut row = Row::new(config.sweep_variable, points[s], policies[p].to_string());
        for m in chunk {
            row.push(m);
        }
        log::info!(
            "{} {:?} {}: throughput {:.4}",
            row.sweep_var.map_or("none".into(), |v| v.to_string()),
            row.sweep_value,
            row.policy,
            row.throughput.mean()
        );
        rows.push(row);
    }
    Ok(ResultTable { rows })
}
