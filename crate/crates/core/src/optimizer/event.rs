use serde::{Deserialize, Serialize};

use super::evaluate::{HourProblem, Violations};
use super::swarm::optimize_hour;
use super::{CaseMode, EventSpec, OptimizerError, SwarmConfig, NOMINAL_V_SUB};
use crate::flow::{PowerFlowResult, PreparedGrid};
use crate::load::LoadSet;
use crate::thermal::{DynamicRatingTracker, WeatherSeries};

/// Chosen operating point and its cost for one event hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourSchedule {
    pub hour: usize,
    pub price_usd_per_kwh: f64,
    pub v_sub: f64,
    /// Curtailment fraction of every load, in load order (zero outside the
    /// program).
    pub chi: Vec<f64>,
    /// Baseline demand shed, kW.
    pub curtailed_kw: f64,
    #[serde(with = "nan_as_null")]
    pub purchased_kw: f64,
    #[serde(with = "nan_as_null")]
    pub energy_cost_usd: f64,
    #[serde(with = "nan_as_null")]
    pub curtailment_cost_usd: f64,
    #[serde(with = "nan_as_null")]
    pub total_cost_usd: f64,
    pub feasible: bool,
    pub violations: Violations,
    /// Branch ampacities in force during the hour.
    pub ratings_a: Vec<f64>,
    /// Peak hot spot of each branch over the hour (dynamic ratings only).
    pub hot_spot_peak_c: Option<Vec<f64>>,
    /// `None` when no candidate produced a solvable flow.
    pub flow: Option<PowerFlowResult>,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSchedule {
    pub case_mode: CaseMode,
    pub seed: u64,
    pub hours: Vec<HourSchedule>,
    #[serde(with = "nan_as_null")]
    pub total_cost_usd: f64,
}

impl EventSchedule {
    pub fn all_feasible(&self) -> bool {
        self.hours.iter().all(|h| h.feasible)
    }

    pub fn infeasible_hours(&self) -> Vec<usize> {
        self.hours.iter().filter(|h| !h.feasible).map(|h| h.hour).collect()
    }

    /// Baseline energy shed over the event, kWh.
    pub fn curtailed_kwh(&self) -> f64 {
        self.hours.iter().map(|h| h.curtailed_kw).sum()
    }

    pub fn hour(&self, hour: usize) -> Option<&HourSchedule> {
        self.hours.iter().find(|h| h.hour == hour)
    }
}

/// Costs of an hour with no solvable flow are NaN in memory and `null` on
/// disk.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn base_flow(grid: &PreparedGrid, loads: &LoadSet, hour: usize) -> Result<PowerFlowResult, OptimizerError> {
    grid.solve(loads, &vec![0.0; loads.len()], NOMINAL_V_SUB, hour)
        .map_err(|source| OptimizerError::BaseFlow { hour, source })
}

/// Optimizes every event hour in order and sums the hourly costs.
///
/// With dynamic ratings the branch thermal states start in equilibrium with
/// the hour-0 base-case loading (nominal set-point, no curtailment), move
/// through the hours before the event with that same base case, and then
/// through each event hour with the currents of the solution chosen for it.
/// Each hour's ratings come from the state reached at its start.
pub fn optimize_event(
    grid: &PreparedGrid,
    loads: &LoadSet,
    weather: Option<&WeatherSeries>,
    event: &EventSpec,
    config: &SwarmConfig,
) -> Result<EventSchedule, OptimizerError> {
    event.validate()?;
    config.validate()?;
    let penalty_weight = config.resolved_penalty_weight(event, loads);
    let divergence_penalty = config.resolved_divergence_penalty(penalty_weight);
    let static_ratings: Vec<f64> = grid.network.branches.iter().map(|b| b.static_rating_a).collect();

    let first = event.event_hours[0];
    let last = *event.event_hours.last().expect("validated non-empty");

    let mut tracker = match event.case_mode {
        CaseMode::CvrDtr => {
            let weather = weather
                .ok_or_else(|| OptimizerError::Spec("dynamic ratings need a weather series".into()))?;
            let flow = base_flow(grid, loads, 0)?;
            let mut t = DynamicRatingTracker::at_equilibrium(
                &grid.network,
                &flow.section_currents_a(&grid.network),
                weather.get(0)?,
                config.parallel,
            );
            for h in 0..first {
                let flow = base_flow(grid, loads, h)?;
                t.advance_hour(&flow.section_currents_a(&grid.network), weather.get(h)?);
            }
            Some((t, weather))
        }
        _ => None,
    };

    let mut hours = Vec::with_capacity(event.event_hours.len());
    for h in first..=last {
        if !event.event_hours.contains(&h) {
            if let Some((t, w)) = tracker.as_mut() {
                let flow = base_flow(grid, loads, h)?;
                t.advance_hour(&flow.section_currents_a(&grid.network), w.get(h)?);
            }
            continue;
        }
        let ratings_a = match &tracker {
            Some((t, w)) => t.ratings(w.get(h)?)?,
            None => static_ratings.clone(),
        };
        let problem = HourProblem {
            grid,
            loads,
            event,
            hour: h,
            ratings_a: &ratings_a,
            penalty_weight,
            divergence_penalty,
        };
        let outcome = optimize_hour(&problem, config);
        let e = outcome.evaluation;
        if !outcome.feasible {
            log::warn!("hour {h}: no feasible operating point found");
        }

        let hot_spot_peak_c = match tracker.as_mut() {
            Some((t, w)) => {
                let currents = match &e.flow {
                    Some(f) => f.section_currents_a(&grid.network),
                    None => base_flow(grid, loads, h)?.section_currents_a(&grid.network),
                };
                Some(t.advance_hour(&currents, w.get(h)?))
            }
            None => None,
        };

        let curtailed_kw = loads.loads().iter().zip(&e.chi).map(|(l, &x)| x * l.baseline_p_kw[h]).sum();
        let (purchased_kw, energy, curtail, total) = match e.cost {
            Some(c) => (c.purchased_kw, c.energy_cost_usd, c.curtailment_cost_usd, c.total_cost_usd),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        log::info!(
            "hour {h}: v_sub {:.4} pu, curtailed {:.1} kW, cost ${:.2}{}",
            e.v_sub,
            curtailed_kw,
            total,
            if outcome.feasible { "" } else { " (infeasible)" }
        );
        hours.push(HourSchedule {
            hour: h,
            price_usd_per_kwh: event.price(h),
            v_sub: e.v_sub,
            chi: e.chi,
            curtailed_kw,
            purchased_kw,
            energy_cost_usd: energy,
            curtailment_cost_usd: curtail,
            total_cost_usd: total,
            feasible: outcome.feasible,
            violations: e.violations,
            ratings_a,
            hot_spot_peak_c,
            flow: e.flow,
            trace: outcome.trace,
        });
    }

    let total_cost_usd = hours.iter().map(|h| h.total_cost_usd).sum();
    Ok(EventSchedule { case_mode: event.case_mode, seed: config.seed, hours, total_cost_usd })
}
