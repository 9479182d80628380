use super::{ThermalComponentState, ThermalLadderSpec, WeatherSample, SUBSTEP_H};

/// One exponential update of every ladder loop over `dt_h` hours with a
/// constant `current_a`.
///
/// Each loop relaxes towards `T_k W_c` with its own time constant:
/// `rise' = rise e^{-dt/tau} + T_k W_c (1 - e^{-dt/tau})`, where `W_c` is the
/// loss at the conductor temperature of the previous state.
pub fn ladder_step(
    spec: &ThermalLadderSpec,
    state: &ThermalComponentState,
    current_a: f64,
    weather: &WeatherSample,
    dt_h: f64,
) -> ThermalComponentState {
    debug_assert!(dt_h > 0.0);
    let state = &state.with_ambient(weather.ambient_c);
    let theta_prev = state.hot_spot_c(spec);
    let w_c = spec.heat_input(current_a, theta_prev, weather);
    let loop_rises = state
        .loop_rises
        .iter()
        .zip(&spec.time_constants_h)
        .enumerate()
        .map(|(k, (&rise, &tau))| {
            let decay = (-dt_h / tau).exp();
            let target = spec.loop_resistance(k, theta_prev, weather) * w_c;
            rise * decay + target * (1.0 - decay)
        })
        .collect();
    ThermalComponentState {
        loop_rises,
        ambient_c: weather.ambient_c,
        current_a,
        last_update_h: state.last_update_h + dt_h,
    }
}

/// End state and peak hot-spot temperature of an [`advance`].
#[derive(Debug, Clone, PartialEq)]
pub struct HourTrajectory {
    pub end: ThermalComponentState,
    pub peak_hot_spot_c: f64,
}

/// Advances a component over `dt_h` hours in [`SUBSTEP_H`] ladder steps so
/// the loss follows the warming conductor within the interval. The peak
/// includes the instant right after the current changes.
pub fn advance(
    spec: &ThermalLadderSpec,
    state: &ThermalComponentState,
    current_a: f64,
    weather: &WeatherSample,
    dt_h: f64,
) -> HourTrajectory {
    let steps = (dt_h / SUBSTEP_H).ceil().max(1.0) as usize;
    let h = dt_h / steps as f64;
    let mut s = ThermalComponentState { current_a, ..state.with_ambient(weather.ambient_c) };
    let mut peak = s.hot_spot_c(spec);
    for _ in 0..steps {
        s = ladder_step(spec, &s, current_a, weather, h);
        peak = peak.max(s.hot_spot_c(spec));
    }
    s.last_update_h = state.last_update_h + dt_h;
    HourTrajectory { end: s, peak_hot_spot_c: peak }
}
