use serde::{Deserialize, Serialize};

use super::ladder::advance;
use super::{ThermalComponentState, ThermalError, ThermalLadderSpec, WeatherSample, WeatherSeries};
use crate::exec::map_indexed;
use crate::grid::RadialNetwork;

const BISECTION_TOL_A: f64 = 0.1;
const BISECTION_MAX_ITER: usize = 20;

fn no_headroom(spec: &ThermalLadderSpec, weather: &WeatherSample) -> ThermalError {
    ThermalError::NoHeadroom { ambient_c: weather.ambient_c, limit_c: spec.hot_spot_limit_c }
}

/// Steady hot-spot temperature minus the limit, with every temperature
/// dependent coefficient evaluated at the limit. Increasing in `current_a`.
fn steady_residual(spec: &ThermalLadderSpec, weather: &WeatherSample, current_a: f64) -> f64 {
    let limit = spec.hot_spot_limit_c;
    let w = spec.heat_input(current_a, limit, weather);
    let rise: f64 = (0..spec.node_count()).map(|k| spec.loop_resistance(k, limit, weather) * w).sum();
    weather.ambient_c
        + spec.dielectric_rise_k
        + rise
        + spec.hot_spot_gradient_k_per_a2 * current_a * current_a
        - limit
}

/// Closed-form steady ampacity, used for calibration.
pub(super) fn steady_ampacity_exact(
    spec: &ThermalLadderSpec,
    weather: &WeatherSample,
) -> Result<f64, ThermalError> {
    let limit = spec.hot_spot_limit_c;
    let r_sum: f64 = (0..spec.node_count()).map(|k| spec.loop_resistance(k, limit, weather)).sum();
    let headroom = steady_residual(spec, weather, 0.0);
    let per_a2 = r_sum * spec.resistance.at(limit) + spec.hot_spot_gradient_k_per_a2;
    if headroom >= 0.0 || per_a2 <= 0.0 {
        return Err(no_headroom(spec, weather));
    }
    Ok((-headroom / per_a2).sqrt())
}

/// Bisection for the largest current in `[0, hi)` satisfying `ok`, assuming
/// `ok(0)` holds and `ok` is monotone. `hi` is grown until it fails.
fn bisect_max<F: Fn(f64) -> bool>(mut hi: f64, ok: F) -> f64 {
    let mut lo = 0.0;
    let mut grow = 0;
    while ok(hi) && grow < 60 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
    }
    let mut iter = 0;
    while hi - lo > BISECTION_TOL_A && iter < BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    lo
}

/// Largest steady current that holds the conductor at its temperature limit
/// under `weather`. For overhead lines this is the steady heat balance
/// `q_gen + q_solar = q_conv + q_rad`; for cables and transformers the ladder
/// resistances are weather independent and only ambient matters.
pub fn steady_ampacity(spec: &ThermalLadderSpec, weather: &WeatherSample) -> Result<f64, ThermalError> {
    if steady_residual(spec, weather, 0.0) >= 0.0 {
        return Err(no_headroom(spec, weather));
    }
    Ok(bisect_max(100.0, |i| steady_residual(spec, weather, i) <= 0.0))
}

/// Steady ampacity of an overhead line from its surface heat balance.
pub fn line_steady_ampacity(spec: &ThermalLadderSpec, weather: &WeatherSample) -> Result<f64, ThermalError> {
    if spec.surface.is_none() {
        return Err(ThermalError::InvalidSpec("line heat balance needs surface exchange parameters".into()));
    }
    steady_ampacity(spec, weather)
}

/// Largest constant current over the coming hour that keeps the hot spot at
/// or below the limit throughout the hour, starting from `state`.
pub fn dynamic_rating(
    spec: &ThermalLadderSpec,
    state: &ThermalComponentState,
    weather_next: &WeatherSample,
) -> Result<f64, ThermalError> {
    let limit = spec.hot_spot_limit_c;
    let ok = |i: f64| advance(spec, state, i, weather_next, 1.0).peak_hot_spot_c <= limit;
    if !ok(0.0) {
        return Err(no_headroom(spec, weather_next));
    }
    let start = steady_ampacity(spec, weather_next).unwrap_or(1.0).max(1.0);
    Ok(bisect_max(start, ok))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingMode {
    Static,
    Dynamic,
}

/// Ampacity per branch for each scheduled hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSchedule {
    pub mode: RatingMode,
    pub hours: Vec<usize>,
    /// `ampacity_a[i][s]`: rating of branch `s` during `hours[i]`.
    pub ampacity_a: Vec<Vec<f64>>,
}

impl RatingSchedule {
    pub fn for_hour(&self, hour: usize) -> Option<&[f64]> {
        self.hours.iter().position(|&h| h == hour).map(|i| self.ampacity_a[i].as_slice())
    }
}

/// Chains dynamic ratings hour to hour: ratings are computed from the
/// current thermal states, then states advance with whatever currents the
/// network actually carried.
#[derive(Debug, Clone)]
pub struct DynamicRatingTracker {
    specs: Vec<ThermalLadderSpec>,
    states: Vec<ThermalComponentState>,
    parallel: bool,
}

impl DynamicRatingTracker {
    pub fn new(network: &RadialNetwork, initial_states: Vec<ThermalComponentState>, parallel: bool) -> Self {
        assert_eq!(initial_states.len(), network.branches.len());
        DynamicRatingTracker {
            specs: network.branches.iter().map(|b| b.thermal.clone()).collect(),
            states: initial_states,
            parallel,
        }
    }

    /// Every branch at equilibrium with the given currents.
    pub fn at_equilibrium(
        network: &RadialNetwork,
        currents_a: &[f64],
        weather: &WeatherSample,
        parallel: bool,
    ) -> Self {
        let states = network
            .branches
            .iter()
            .zip(currents_a)
            .map(|(b, &i)| ThermalComponentState::equilibrium(&b.thermal, i, weather))
            .collect();
        Self::new(network, states, parallel)
    }

    pub fn states(&self) -> &[ThermalComponentState] {
        &self.states
    }

    pub fn hot_spots_c(&self) -> Vec<f64> {
        self.specs.iter().zip(&self.states).map(|(sp, st)| st.hot_spot_c(sp)).collect()
    }

    /// Dynamic rating of every branch for the coming hour. A branch already
    /// past its limit with no current gets a zero rating.
    pub fn ratings(&self, weather: &WeatherSample) -> Result<Vec<f64>, ThermalError> {
        map_indexed(self.specs.len(), self.parallel, |s| {
            match dynamic_rating(&self.specs[s], &self.states[s], weather) {
                Err(ThermalError::NoHeadroom { .. }) => {
                    log::warn!("branch {s}: no thermal headroom at hour {}", weather.hour);
                    Ok(0.0)
                }
                other => other,
            }
        })
        .into_iter()
        .collect()
    }

    /// Advances every branch by one hour; returns the peak hot spot of each.
    pub fn advance_hour(&mut self, currents_a: &[f64], weather: &WeatherSample) -> Vec<f64> {
        assert_eq!(currents_a.len(), self.specs.len());
        let traj = map_indexed(self.specs.len(), self.parallel, |s| {
            advance(&self.specs[s], &self.states[s], currents_a[s], weather, 1.0)
        });
        let peaks = traj.iter().map(|t| t.peak_hot_spot_c).collect();
        self.states = traj.into_iter().map(|t| t.end).collect();
        peaks
    }
}

/// Ratings for each of `hours`. Static mode repeats every branch's static
/// rating; dynamic mode chains [`dynamic_rating`] from `initial_states`,
/// advancing each branch at its own rating current.
pub fn rating_schedule(
    network: &RadialNetwork,
    weather: &WeatherSeries,
    hours: &[usize],
    mode: RatingMode,
    initial_states: &[ThermalComponentState],
) -> Result<RatingSchedule, ThermalError> {
    for &h in hours {
        weather.get(h)?;
    }
    let ampacity_a = match mode {
        RatingMode::Static => {
            let row: Vec<f64> = network.branches.iter().map(|b| b.static_rating_a).collect();
            vec![row; hours.len()]
        }
        RatingMode::Dynamic => {
            let mut tracker = DynamicRatingTracker::new(network, initial_states.to_vec(), true);
            let mut rows = Vec::with_capacity(hours.len());
            for &h in hours {
                let w = weather.get(h)?;
                let row = tracker.ratings(w)?;
                tracker.advance_hour(&row, w);
                rows.push(row);
            }
            rows
        }
    };
    Ok(RatingSchedule { mode, hours: hours.to_vec(), ampacity_a })
}
