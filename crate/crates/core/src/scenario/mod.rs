//! Case-study runner.
//!
//! A scenario ties a network file, an hourly weather file and an hourly
//! price file to one case mode, runs the event optimization and writes
//! plot-ready tables. [`compare`] lines up the three cases, [`sweep`] finds
//! the lowest workable substation voltage across demand factors and
//! [`fixtures`] generates the synthetic feeders shipped with the crate.

pub mod compare;
pub mod fixtures;
mod inputs;
mod output;
pub mod sweep;

pub use compare::{
    compare_cases, current_change_map, run_comparison, write_comparison, BranchChange, CaseSummary,
    ComparisonReport,
};
pub use inputs::{load_inputs, parse_prices_csv, read_prices_csv, CaseInputs};
pub use output::{read_schedule, write_artifacts, ScheduleFile, SCHEDULE_FORMAT};
pub use sweep::{demand_factor_sweep, write_sweep_csv, SweepPoint};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridError;
use crate::load::LoadError;
use crate::optimizer::{optimize_event, CaseMode, EventSpec, OptimizerError, SwarmConfig};
use crate::thermal::ThermalError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("network: {0}")]
    Grid(#[from] GridError),
    #[error("loads: {0}")]
    Load(#[from] LoadError),
    #[error("weather: {0}")]
    Thermal(#[from] ThermalError),
    #[error("prices: {0}")]
    Prices(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("inputs differ between runs: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Format(String),
}

impl ScenarioError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ScenarioError::Io { path: path.to_path_buf(), source }
    }
}

/// Optional settings file. Every field has a default; command-line values
/// take precedence over the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub case: Option<CaseMode>,
    pub event_hours: Option<Vec<usize>>,
    pub mcl: f64,
    pub v_bounds: (f64, f64),
    pub v_sub_bounds: (f64, f64),
    /// Hours reported in `voltages.csv`.
    pub voltage_hours: Vec<usize>,
    pub demand_factor: f64,
    pub swarm: SwarmConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            case: None,
            event_hours: None,
            mcl: 0.5,
            v_bounds: (0.9, 1.1),
            v_sub_bounds: (0.9, 1.1),
            voltage_hours: vec![10, 14],
            demand_factor: 1.0,
            swarm: SwarmConfig::default(),
        }
    }
}

impl Settings {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Default peak window, hours 10 to 21 inclusive.
pub fn default_event_hours() -> Vec<usize> {
    (10..=21).collect()
}

/// Parses an inclusive hour range such as `10-21`, or a single hour.
pub fn parse_hour_range(text: &str) -> Result<Vec<usize>, ScenarioError> {
    let bad = || ScenarioError::Config(format!("bad hour range `{text}`"));
    let (a, b) = match text.split_once('-') {
        Some((a, b)) => (a, b),
        None => (text, text),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b || b >= crate::HOURS_PER_DAY {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub network_path: PathBuf,
    pub weather_path: PathBuf,
    pub prices_path: PathBuf,
    pub case_mode: CaseMode,
    pub event_hours: Vec<usize>,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Multiplier on every baseline load.
    pub demand_factor: f64,
    pub settings: Settings,
}

impl ScenarioConfig {
    pub fn new(
        network_path: impl Into<PathBuf>,
        weather_path: impl Into<PathBuf>,
        prices_path: impl Into<PathBuf>,
        case_mode: CaseMode,
        output_dir: impl Into<PathBuf>,
    ) -> Self {
        ScenarioConfig {
            network_path: network_path.into(),
            weather_path: weather_path.into(),
            prices_path: prices_path.into(),
            case_mode,
            event_hours: default_event_hours(),
            seed: 0,
            output_dir: output_dir.into(),
            demand_factor: 1.0,
            settings: Settings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.demand_factor > 0.0 && self.demand_factor.is_finite()) {
            return Err(ScenarioError::Config(format!(
                "demand factor must be positive, got {}",
                self.demand_factor
            )));
        }
        for p in [&self.network_path, &self.weather_path, &self.prices_path] {
            if !p.exists() {
                return Err(ScenarioError::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                ));
            }
        }
        Ok(())
    }

    pub fn event_spec(&self, prices: &[f64]) -> EventSpec {
        EventSpec {
            event_hours: self.event_hours.clone(),
            market_prices: prices.to_vec(),
            mcl: self.settings.mcl,
            v_bounds: self.settings.v_bounds,
            v_sub_bounds: self.settings.v_sub_bounds,
            case_mode: self.case_mode,
        }
    }

    pub fn swarm(&self) -> SwarmConfig {
        SwarmConfig { seed: self.seed, ..self.settings.swarm.clone() }
    }
}

/// Optimizes one case from files and writes its artifacts to
/// `config.output_dir`.
pub fn run_case(config: &ScenarioConfig) -> Result<ScheduleFile, ScenarioError> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let schedule = run_loaded(config, &inputs)?;
    let file = ScheduleFile::new(config, &inputs, schedule);
    write_artifacts(&file, &config.output_dir)?;
    Ok(file)
}

/// Optimizes one case from already loaded inputs without touching disk.
pub fn run_loaded(
    config: &ScenarioConfig,
    inputs: &CaseInputs,
) -> Result<crate::optimizer::EventSchedule, ScenarioError> {
    let event = config.event_spec(&inputs.prices);
    log::info!("case {} over hours {:?}, seed {}", config.case_mode, config.event_hours, config.seed);
    Ok(optimize_event(&inputs.grid, &inputs.loads, Some(&inputs.weather), &event, &config.swarm())?)
}
