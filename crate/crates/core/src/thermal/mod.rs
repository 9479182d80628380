//! Thermal state and ampacity of feeder components.
//!
//! Every branch carries a ladder thermal model: one or more first-order loops,
//! each with its own time constant, driven by the conductor loss
//! `W_c = I^2 R(theta_c)` evaluated at the conductor (hot-spot) temperature of
//! the previous step. The hot-spot temperature is the sum of ambient, a fixed
//! dielectric rise, the loop rises, and for transformers an instantaneous
//! winding gradient proportional to `I^2`.
//!
//! Overhead lines additionally exchange heat with the weather: the loop
//! resistance comes from a convective plus radiative film coefficient and the
//! conductor absorbs solar gain. At steady state that reduces to the usual
//! line heat balance `q_gen + q_solar = q_conv + q_rad`.

mod ladder;
mod rating;
mod weather;

pub use ladder::{advance, ladder_step, HourTrajectory};
pub use rating::{
    dynamic_rating, line_steady_ampacity, rating_schedule, steady_ampacity, DynamicRatingTracker, RatingMode,
    RatingSchedule,
};
pub use weather::{parse_weather_csv, read_weather_csv, WeatherSeries};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::ConductorClass;

/// Stefan-Boltzmann constant, W/(m^2 K^4).
pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;
const KELVIN: f64 = 273.15;

/// Internal integration step used when a component is advanced over an hour.
pub const SUBSTEP_H: f64 = 1.0 / 60.0;

#[derive(Debug, Error, PartialEq)]
pub enum ThermalError {
    #[error("no thermal headroom: ambient {ambient_c} C leaves no margin below the {limit_c} C limit")]
    NoHeadroom { ambient_c: f64, limit_c: f64 },
    #[error("weather data missing for hour {0}")]
    MissingWeather(usize),
    #[error("invalid weather sample for hour {hour}: {reason}")]
    InvalidWeather { hour: usize, reason: String },
    #[error("invalid thermal parameters: {0}")]
    InvalidSpec(String),
    #[error("weather file: {0}")]
    Csv(String),
}

/// Weather acting on a component during one hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherSample {
    pub hour: usize,
    pub ambient_c: f64,
    pub wind_mps: f64,
    pub solar_wm2: f64,
}

impl WeatherSample {
    /// Worst-case weather used to define static ratings: hot, nearly still
    /// air and full sun.
    pub const STATIC_REFERENCE: WeatherSample =
        WeatherSample { hour: 0, ambient_c: 40.0, wind_mps: 0.61, solar_wm2: 1000.0 };

    pub fn validate(&self) -> Result<(), ThermalError> {
        let bad = |reason: &str| ThermalError::InvalidWeather { hour: self.hour, reason: reason.to_string() };
        if !self.ambient_c.is_finite() {
            return Err(bad("ambient temperature is not finite"));
        }
        if !(self.wind_mps >= 0.0) {
            return Err(bad("wind speed must be non-negative"));
        }
        if !(self.solar_wm2 >= 0.0) {
            return Err(bad("solar irradiance must be non-negative"));
        }
        Ok(())
    }
}

/// Linear temperature dependence of conductor resistance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConductorResistance {
    /// Resistance at `theta_ref_c`, in ohms (per metre for lines and cables).
    pub r_ref_ohm: f64,
    pub alpha_per_k: f64,
    pub theta_ref_c: f64,
}

impl ConductorResistance {
    pub fn at(&self, theta_c: f64) -> f64 {
        (self.r_ref_ohm * (1.0 + self.alpha_per_k * (theta_c - self.theta_ref_c))).max(0.0)
    }
}

/// Heat exchange of a bare overhead conductor with the surrounding air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceExchange {
    pub diameter_m: f64,
    /// Still-air convection coefficient, W/(m K).
    pub conv_a: f64,
    /// Forced-convection coefficient, W/(m K) per sqrt(m/s).
    pub conv_b: f64,
    pub emissivity: f64,
    pub absorptivity: f64,
}

impl SurfaceExchange {
    pub fn convection_coefficient(&self, wind_mps: f64) -> f64 {
        self.conv_a + self.conv_b * wind_mps.max(0.0).sqrt()
    }

    pub fn q_conv(&self, theta_c: f64, ambient_c: f64, wind_mps: f64) -> f64 {
        self.convection_coefficient(wind_mps) * (theta_c - ambient_c)
    }

    pub fn q_rad(&self, theta_c: f64, ambient_c: f64) -> f64 {
        let (tk, ak) = (theta_c + KELVIN, ambient_c + KELVIN);
        self.emissivity
            * STEFAN_BOLTZMANN
            * std::f64::consts::PI
            * self.diameter_m
            * (tk.powi(4) - ak.powi(4))
    }

    pub fn q_solar(&self, solar_wm2: f64) -> f64 {
        self.absorptivity * solar_wm2 * self.diameter_m
    }

    /// Radiative film coefficient `q_rad / (theta_c - ambient)`, W/(m K).
    fn radiative_coefficient(&self, theta_c: f64, ambient_c: f64) -> f64 {
        let (tk, ak) = (theta_c + KELVIN, ambient_c + KELVIN);
        // (T^4 - A^4) / (T - A) = (T^2 + A^2)(T + A), finite at T == A
        self.emissivity
            * STEFAN_BOLTZMANN
            * std::f64::consts::PI
            * self.diameter_m
            * (tk * tk + ak * ak)
            * (tk + ak)
    }

    /// Thermal resistance from conductor to air, K m / W.
    pub fn thermal_resistance(&self, theta_c: f64, ambient_c: f64, wind_mps: f64) -> f64 {
        1.0 / (self.convection_coefficient(wind_mps) + self.radiative_coefficient(theta_c, ambient_c))
    }
}

/// Parameters of a component's ladder thermal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalLadderSpec {
    /// Time constant of each ladder loop, hours.
    pub time_constants_h: Vec<f64>,
    /// Thermal resistance of each loop, K/W. When `surface` is set these are
    /// dimensionless shares of the weather-dependent surface resistance.
    pub loop_resistances: Vec<f64>,
    /// Constant rise from dielectric losses, K.
    #[serde(default)]
    pub dielectric_rise_k: f64,
    pub hot_spot_limit_c: f64,
    pub resistance: ConductorResistance,
    /// Instantaneous hot-spot gradient, K per A^2 (transformer windings).
    #[serde(default)]
    pub hot_spot_gradient_k_per_a2: f64,
    #[serde(default)]
    pub surface: Option<SurfaceExchange>,
}

impl ThermalLadderSpec {
    pub fn node_count(&self) -> usize {
        self.time_constants_h.len()
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        let bad = |m: &str| Err(ThermalError::InvalidSpec(m.to_string()));
        if self.time_constants_h.is_empty() {
            return bad("at least one ladder loop is required");
        }
        if self.time_constants_h.len() != self.loop_resistances.len() {
            return bad("time constants and loop resistances differ in length");
        }
        if self.time_constants_h.iter().any(|&t| !(t > 0.0)) {
            return bad("time constants must be positive");
        }
        if self.loop_resistances.iter().any(|&r| !(r >= 0.0)) {
            return bad("loop resistances must be non-negative");
        }
        if !(self.hot_spot_limit_c > 0.0) {
            return bad("hot-spot limit must be positive");
        }
        if !(self.resistance.r_ref_ohm > 0.0) {
            return bad("conductor resistance must be positive");
        }
        if self.hot_spot_gradient_k_per_a2 < 0.0 {
            return bad("hot-spot gradient must be non-negative");
        }
        Ok(())
    }

    /// Defaults per conductor class. Time constants: transformer 4 h,
    /// overhead line 15 min, underground cable 8 h.
    pub fn default_for(class: ConductorClass) -> Self {
        match class {
            ConductorClass::Overhead => ThermalLadderSpec {
                time_constants_h: vec![0.25],
                loop_resistances: vec![1.0],
                dielectric_rise_k: 0.0,
                hot_spot_limit_c: 90.0,
                resistance: ConductorResistance {
                    r_ref_ohm: 7.0e-5,
                    alpha_per_k: 0.004_03,
                    theta_ref_c: 20.0,
                },
                hot_spot_gradient_k_per_a2: 0.0,
                surface: Some(SurfaceExchange {
                    diameter_m: 0.0196,
                    conv_a: 0.6,
                    conv_b: 1.6,
                    emissivity: 0.5,
                    absorptivity: 0.5,
                }),
            },
            ConductorClass::Underground => ThermalLadderSpec {
                time_constants_h: vec![8.0],
                loop_resistances: vec![2.0],
                dielectric_rise_k: 3.0,
                hot_spot_limit_c: 90.0,
                resistance: ConductorResistance {
                    r_ref_ohm: 1.0e-4,
                    alpha_per_k: 0.003_93,
                    theta_ref_c: 20.0,
                },
                hot_spot_gradient_k_per_a2: 0.0,
                surface: None,
            },
            // 40 K top-oil rise plus 30 K winding gradient at 288 A rated
            ConductorClass::Transformer => ThermalLadderSpec {
                time_constants_h: vec![4.0],
                loop_resistances: vec![40.0 / 60_000.0],
                dielectric_rise_k: 0.0,
                hot_spot_limit_c: 110.0,
                resistance: ConductorResistance {
                    r_ref_ohm: 60_000.0 / (288.7 * 288.7),
                    alpha_per_k: 0.0,
                    theta_ref_c: 75.0,
                },
                hot_spot_gradient_k_per_a2: 30.0 / (288.7 * 288.7),
                surface: None,
            },
        }
    }

    /// Rescales the loss-producing terms so that the steady ampacity under
    /// `weather` equals `rating_a`. Ampacity scales with the inverse square
    /// root of resistance, so a single multiplicative pass is exact.
    pub fn calibrate_to_rating(
        &mut self,
        rating_a: f64,
        weather: &WeatherSample,
    ) -> Result<(), ThermalError> {
        if !(rating_a > 0.0) {
            return Err(ThermalError::InvalidSpec("rating must be positive".into()));
        }
        let current = rating::steady_ampacity_exact(self, weather)?;
        let k = (current / rating_a).powi(2);
        self.resistance.r_ref_ohm *= k;
        self.hot_spot_gradient_k_per_a2 *= k;
        Ok(())
    }

    /// Loss heating the ladder at conductor temperature `theta_c`, W.
    pub fn heat_input(&self, current_a: f64, theta_c: f64, weather: &WeatherSample) -> f64 {
        let solar = self.surface.map_or(0.0, |s| s.q_solar(weather.solar_wm2));
        current_a * current_a * self.resistance.at(theta_c) + solar
    }

    /// Thermal resistance of loop `k` at conductor temperature `theta_c`.
    pub fn loop_resistance(&self, k: usize, theta_c: f64, weather: &WeatherSample) -> f64 {
        match &self.surface {
            Some(s) => {
                self.loop_resistances[k] * s.thermal_resistance(theta_c, weather.ambient_c, weather.wind_mps)
            }
            None => self.loop_resistances[k],
        }
    }
}

/// Thermal state of one component at an hour boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalComponentState {
    /// Temperature rise of each ladder loop, K.
    pub loop_rises: Vec<f64>,
    /// Ambient temperature during the last step, C.
    pub ambient_c: f64,
    /// Current carried during the last step, A.
    pub current_a: f64,
    /// Elapsed time at this state, hours.
    pub last_update_h: f64,
}

impl ThermalComponentState {
    /// Component sitting at ambient with no load.
    pub fn cold(spec: &ThermalLadderSpec, ambient_c: f64) -> Self {
        ThermalComponentState {
            loop_rises: vec![0.0; spec.node_count()],
            ambient_c,
            current_a: 0.0,
            last_update_h: 0.0,
        }
    }

    /// Steady state reached after carrying `current_a` indefinitely under
    /// `weather`. Solved as a fixed point of the ladder targets.
    pub fn equilibrium(spec: &ThermalLadderSpec, current_a: f64, weather: &WeatherSample) -> Self {
        let mut state = ThermalComponentState {
            loop_rises: vec![0.0; spec.node_count()],
            ambient_c: weather.ambient_c,
            current_a,
            last_update_h: 0.0,
        };
        for _ in 0..500 {
            let theta = state.hot_spot_c(spec);
            let w = spec.heat_input(current_a, theta, weather);
            let next: Vec<f64> =
                (0..spec.node_count()).map(|k| spec.loop_resistance(k, theta, weather) * w).collect();
            let delta = next.iter().zip(&state.loop_rises).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            state.loop_rises = next;
            if delta < 1e-10 {
                break;
            }
        }
        state
    }

    /// Same node temperatures expressed against a new ambient. Weather only
    /// changes at hour boundaries, and a conductor cannot change temperature
    /// instantly, so the first loop absorbs the ambient step.
    pub fn with_ambient(&self, ambient_c: f64) -> Self {
        let mut s = self.clone();
        if let Some(first) = s.loop_rises.first_mut() {
            *first += self.ambient_c - ambient_c;
        }
        s.ambient_c = ambient_c;
        s
    }

    /// Node temperatures: ambient plus dielectric rise plus the cumulative
    /// loop rises, ending at the hot spot (without the winding gradient).
    pub fn node_temps(&self, spec: &ThermalLadderSpec) -> Vec<f64> {
        let mut t = self.ambient_c + spec.dielectric_rise_k;
        self.loop_rises
            .iter()
            .map(|r| {
                t += r;
                t
            })
            .collect()
    }

    pub fn hot_spot_c(&self, spec: &ThermalLadderSpec) -> f64 {
        spec.dielectric_rise_k
            + self.ambient_c
            + self.loop_rises.iter().sum::<f64>()
            + spec.hot_spot_gradient_k_per_a2 * self.current_a * self.current_a
    }
}
