//! Cross-check of the closed-form single-channel solution against the
//! dynamic-programming solver, plus Whittle index sanity checks.

use std::fmt::Write as _;

use super::format_g9;
use crate::error::Result;
use crate::indices::whittle_index;
use crate::markov::{ChannelParams, Occupancy};
use crate::single_channel::{average_reward, optimal_threshold, solve_dp, Threshold};

pub const GAIN_TOLERANCE: f64 = 1e-6;
pub const INDIFFERENCE_TOLERANCE: f64 = 1e-10;
/// Two thresholds whose rewards differ by less than this are treated as tied.
pub const THRESHOLD_TIE: f64 = 1e-9;
pub const DP_DELTA_MAX: u32 = 200;
pub const DP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OracleGrid {
    pub qs: Vec<f64>,
    pub costs: Vec<f64>,
    /// Largest `H` in the Whittle indifference check.
    pub max_h: u32,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            qs: vec![0.05, 0.15, 0.25, 0.35, 0.45],
            costs: (1..=9).map(|k| k as f64 / 10.0).collect(),
            max_h: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub q: f64,
    pub cost: f64,
    pub h_closed_form: Threshold,
    pub h_dp: Threshold,
    pub gain_closed_form: f64,
    pub gain_dp: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub max_gain_error: f64,
    /// Largest `|λ(H−1, W(1,H)) − λ(H, W(1,H))|` over the grid.
    pub max_indifference_residual: f64,
    /// Largest `|W(1,1)|` over the grid.
    pub max_whittle_at_one: f64,
    pub violations: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,D,H_closed_form,H_dp,gain_closed_form,gain_dp,abs_error\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                format_g9(r.q),
                format_g9(r.cost),
                r.h_closed_form,
                r.h_dp,
                format_g9(r.gain_closed_form),
                format_g9(r.gain_dp),
                format_g9(r.abs_error),
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "max gain error {:.3e}; max indifference residual {:.3e}; max |W(1,1)| {:.3e}",
            self.max_gain_error, self.max_indifference_residual, self.max_whittle_at_one
        );
        for v in &self.violations {
            s.push_str("\nviolation: ");
            s.push_str(v);
        }
        s
    }
}

fn gain_of(params: ChannelParams, h: Threshold, cost: f64) -> f64 {
    match h {
        Threshold::Finite(h) => average_reward(params, h, cost),
        Threshold::Never => 0.0,
    }
}

pub fn oracle_check(grid: &OracleGrid) -> Result<OracleReport> {
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut max_gain_error: f64 = 0.0;

    for &q in &grid.qs {
        let params = ChannelParams::new(q)?;
        for &cost in &grid.costs {
            let h_cf = optimal_threshold(params, cost);
            let gain_cf = gain_of(params, h_cf, cost);
            let dp = solve_dp(params, cost, DP_DELTA_MAX, DP_TOLERANCE)?;
            let h_dp = dp.threshold();
            let abs_error = (dp.gain - gain_cf).abs();
            max_gain_error = max_gain_error.max(abs_error);
            if abs_error > GAIN_TOLERANCE {
                violations.push(format!("q={q} D={cost}: gain error {abs_error:.3e}"));
            }
            if h_dp != h_cf && (gain_of(params, h_dp, cost) - gain_cf).abs() > THRESHOLD_TIE {
                violations.push(format!("q={q} D={cost}: threshold {h_cf} vs solver {h_dp}"));
            }
            if !dp.is_threshold_type() {
                violations.push(format!(
                    "q={q} D={cost}: solver policy is not of threshold type"
                ));
            }
            rows.push(OracleRow {
                q,
                cost,
                h_closed_form: h_cf,
                h_dp,
                gain_closed_form: gain_cf,
                gain_dp: dp.gain,
                abs_error,
            });
        }
    }

    let mut max_indifference_residual: f64 = 0.0;
    let mut max_whittle_at_one: f64 = 0.0;
    for &q in &grid.qs {
        let params = ChannelParams::new(q)?;
        let w1 = whittle_index(Occupancy::Occupied, 1, params).value();
        max_whittle_at_one = max_whittle_at_one.max(w1.abs());
        if w1 != 0.0 {
            violations.push(format!("q={q}: W(1,1) = {w1}"));
        }
        for h in 2..=grid.max_h {
            let w = whittle_index(Occupancy::Occupied, h, params).value();
            let r = (average_reward(params, h - 1, w) - average_reward(params, h, w)).abs();
            max_indifference_residual = max_indifference_residual.max(r);
            if r > INDIFFERENCE_TOLERANCE {
                violations.push(format!("q={q} H={h}: indifference residual {r:.3e}"));
            }
        }
    }

    Ok(OracleReport {
        rows,
        max_gain_error,
        max_indifference_residual,
        max_whittle_at_one,
        violations,
    })
}

/// `λ(H, D)` for `H ∈ [1, max_h]` at each cost, as CSV (`D,H,lambda`).
pub fn reward_curve_csv(q: f64, costs: &[f64], max_h: u32) -> Result<String> {
    let params = ChannelParams::new(q)?;
    let mut out = String::from("D,H,lambda\n");
    for &d in costs {
        for h in 1..=max_h {
            let _ = writeln!(
                out,
                "{},{h},{}",
                format_g9(d),
                format_g9(average_reward(params, h, d))
            );
        }
    }
    Ok(out)
}
