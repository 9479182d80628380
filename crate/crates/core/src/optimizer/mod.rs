//! Per-hour cost minimization with a particle swarm.
//!
//! For every event hour the decision vector is the substation set-point
//! (in the voltage-reduction modes) followed by one curtailment fraction per
//! participating load. Each candidate is priced by running the power flow and
//! adding a linear penalty for any voltage, current or curtailment-limit
//! violation.

mod evaluate;
mod event;
mod swarm;

pub use evaluate::{
    evaluate, flow_violations, hour_cost, CostBreakdown, Evaluation, HourProblem, Violations,
};
pub use event::{optimize_event, EventSchedule, HourSchedule};
pub use swarm::{
    clamp_to_box, optimize_hour, particle_rng, pso_update, velocity_update, DecisionBox, GlobalBest,
    HourOutcome, Particle,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowError;
use crate::load::LoadSet;
use crate::thermal::{RatingMode, ThermalError};

/// Substation set-point used when voltage reduction is off.
pub const NOMINAL_V_SUB: f64 = 1.0;

/// Feasibility tolerances applied to reported schedules.
pub const VOLTAGE_TOL_PU: f64 = 1e-6;
pub const CURRENT_TOL_A: f64 = 1e-3;
pub const MCL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid event specification: {0}")]
    Spec(String),
    #[error("invalid swarm configuration: {0}")]
    Config(String),
    #[error("base-case power flow failed at hour {hour}: {source}")]
    BaseFlow { hour: usize, source: FlowError },
    #[error(transparent)]
    Thermal(#[from] ThermalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseMode {
    /// Curtailment only, substation held at nominal, static ratings.
    #[serde(rename = "static")]
    Static,
    /// Substation set-point optimized, static ratings.
    #[serde(rename = "cvr")]
    Cvr,
    /// Substation set-point optimized, dynamic ratings chained hour to hour.
    #[serde(rename = "cvr_dtr", alias = "cvr-dtr")]
    CvrDtr,
}

impl CaseMode {
    pub const ALL: [CaseMode; 3] = [CaseMode::Static, CaseMode::Cvr, CaseMode::CvrDtr];

    pub fn optimizes_voltage(self) -> bool {
        self != CaseMode::Static
    }

    pub fn rating_mode(self) -> RatingMode {
        match self {
            CaseMode::CvrDtr => RatingMode::Dynamic,
            _ => RatingMode::Static,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseMode::Static => "static",
            CaseMode::Cvr => "cvr",
            CaseMode::CvrDtr => "cvr_dtr",
        }
    }
}

impl fmt::Display for CaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(CaseMode::Static),
            "cvr" => Ok(CaseMode::Cvr),
            "cvr_dtr" | "cvr-dtr" => Ok(CaseMode::CvrDtr),
            other => Err(format!("unknown case `{other}` (expected static, cvr or cvr-dtr)")),
        }
    }
}

/// What to optimize: which hours, at what prices, under which limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    /// Hours of day, ascending.
    pub event_hours: Vec<usize>,
    /// Energy price for each hour of the day, $/kWh.
    pub market_prices: Vec<f64>,
    /// Maximum curtailment fraction per load.
    pub mcl: f64,
    /// Bus voltage limits, pu.
    pub v_bounds: (f64, f64),
    /// Search range for the substation set-point, pu.
    pub v_sub_bounds: (f64, f64),
    pub case_mode: CaseMode,
}

impl EventSpec {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let err = |m: String| Err(OptimizerError::Spec(m));
        if self.event_hours.is_empty() {
            return err("no event hours".into());
        }
        if self.event_hours.windows(2).any(|w| w[0] >= w[1]) {
            return err("event hours must be strictly ascending".into());
        }
        if let Some(&h) = self.event_hours.iter().find(|&&h| h >= crate::HOURS_PER_DAY) {
            return err(format!("event hour {h} outside the day"));
        }
        for &h in &self.event_hours {
            match self.market_prices.get(h) {
                Some(p) if p.is_finite() && *p >= 0.0 => {}
                Some(p) => return err(format!("price {p} at hour {h} is not a valid price")),
                None => return err(format!("no market price for hour {h}")),
            }
        }
        if !(0.0..=1.0).contains(&self.mcl) {
            return err(format!("MCL {} outside [0, 1]", self.mcl));
        }
        let (lo, hi) = self.v_bounds;
        if !(lo > 0.0 && lo < hi) {
            return err(format!("voltage bounds ({lo}, {hi}) are not an interval"));
        }
        let (slo, shi) = self.v_sub_bounds;
        let (rlo, rhi) = crate::flow::V_SUB_RANGE;
        if !(slo <= shi && slo >= rlo && shi <= rhi) {
            return err(format!("substation bounds ({slo}, {shi}) must lie within [{rlo}, {rhi}]"));
        }
        Ok(())
    }

    pub fn price(&self, hour: usize) -> f64 {
        self.market_prices[hour]
    }

    /// Largest hourly energy bill at baseline demand over the event.
    pub fn max_hourly_energy_cost(&self, loads: &LoadSet) -> f64 {
        self.event_hours.iter().map(|&h| self.price(h) * loads.baseline_total_kw(h)).fold(0.0, f64::max)
    }
}

/// Swarm hyperparameters. Inertia decays linearly from `inertia_start` to
/// `inertia_end` over the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub particle_count: usize,
    pub max_iterations: usize,
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// $ per unit of summed violation. `None` derives it from the event.
    pub penalty_weight: Option<f64>,
    /// Fitness assigned to candidates whose power flow fails. `None` means
    /// 100 times the penalty weight.
    pub divergence_penalty: Option<f64>,
    /// Evaluate particles on the rayon pool when the feature is enabled.
    pub parallel: bool,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            particle_count: 40,
            max_iterations: 100,
            inertia_start: 0.9,
            inertia_end: 0.4,
            cognitive: 2.0,
            social: 2.0,
            seed: 0,
            penalty_weight: None,
            divergence_penalty: None,
            parallel: true,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let err = |m: &str| Err(OptimizerError::Config(m.into()));
        if self.particle_count < 2 {
            return err("particle_count must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.inertia_start) || !(0.0..=1.0).contains(&self.inertia_end) {
            return err("inertia must lie in [0, 1]");
        }
        if !(self.cognitive >= 0.0 && self.social >= 0.0) {
            return err("acceleration coefficients must be non-negative");
        }
        if matches!(self.penalty_weight, Some(w) if !(w > 0.0)) {
            return err("penalty_weight must be positive");
        }
        if matches!(self.divergence_penalty, Some(w) if !(w > 0.0)) {
            return err("divergence_penalty must be positive");
        }
        Ok(())
    }

    /// Inertia at iteration `t` (1-based) of the run.
    pub fn inertia(&self, t: usize) -> f64 {
        if self.max_iterations <= 1 {
            return self.inertia_start;
        }
        let frac = (t.saturating_sub(1)) as f64 / (self.max_iterations - 1) as f64;
        self.inertia_start + (self.inertia_end - self.inertia_start) * frac.min(1.0)
    }

    pub fn resolved_penalty_weight(&self, event: &EventSpec, loads: &LoadSet) -> f64 {
        self.penalty_weight.unwrap_or_else(|| (1e4 * event.max_hourly_energy_cost(loads)).max(1e4))
    }

    pub fn resolved_divergence_penalty(&self, penalty_weight: f64) -> f64 {
        self.divergence_penalty.unwrap_or(100.0 * penalty_weight)
    }
}
