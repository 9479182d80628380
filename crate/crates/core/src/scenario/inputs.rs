use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{ScenarioConfig, ScenarioError};
use crate::flow::PreparedGrid;
use crate::grid::parse_network;
use crate::load::LoadSet;
use crate::thermal::{parse_weather_csv, WeatherSeries};
use crate::HOURS_PER_DAY;

/// Parsed and prepared inputs of one scenario.
#[derive(Debug, Clone)]
pub struct CaseInputs {
    pub grid: PreparedGrid,
    /// Loads with the demand factor applied.
    pub loads: LoadSet,
    pub weather: WeatherSeries,
    /// $/kWh per hour of day; NaN where the file has no entry.
    pub prices: Vec<f64>,
    /// Digest of the input files, demand factor and event window. Runs are
    /// only comparable when this matches.
    pub fingerprint: String,
}

#[derive(Deserialize)]
struct PriceRow {
    hour: usize,
    usd_per_kwh: f64,
}

/// Parses `hour,usd_per_kwh` CSV (header required).
pub fn parse_prices_csv<R: Read>(reader: R) -> Result<Vec<f64>, ScenarioError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut prices = vec![f64::NAN; HOURS_PER_DAY];
    for row in rdr.deserialize::<PriceRow>() {
        let row = row.map_err(|e| ScenarioError::Prices(e.to_string()))?;
        if row.hour >= HOURS_PER_DAY {
            return Err(ScenarioError::Prices(format!("hour {} outside the day", row.hour)));
        }
        if !(row.usd_per_kwh.is_finite() && row.usd_per_kwh >= 0.0) {
            return Err(ScenarioError::Prices(format!(
                "price {} at hour {} must be finite and non-negative",
                row.usd_per_kwh, row.hour
            )));
        }
        if !prices[row.hour].is_nan() {
            return Err(ScenarioError::Prices(format!("hour {} listed twice", row.hour)));
        }
        prices[row.hour] = row.usd_per_kwh;
    }
    Ok(prices)
}

pub fn read_prices_csv(path: impl AsRef<Path>) -> Result<Vec<f64>, ScenarioError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| ScenarioError::io(path, e))?;
    parse_prices_csv(file)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, ScenarioError> {
    std::fs::read(path).map_err(|e| ScenarioError::io(path, e))
}

pub fn load_inputs(config: &ScenarioConfig) -> Result<CaseInputs, ScenarioError> {
    let net_bytes = read_bytes(&config.network_path)?;
    let weather_bytes = read_bytes(&config.weather_path)?;
    let price_bytes = read_bytes(&config.prices_path)?;

    let text = String::from_utf8(net_bytes.clone())
        .map_err(|e| ScenarioError::Format(format!("network file is not UTF-8: {e}")))?;
    let feeder = parse_network(&text)?;
    let grid = PreparedGrid::new(feeder.network)?;
    let loads = LoadSet::new(&grid.network, feeder.loads)?.scaled(config.demand_factor);
    let weather = parse_weather_csv(weather_bytes.as_slice())?;
    let prices = parse_prices_csv(price_bytes.as_slice())?;

    let mut h = Sha256::new();
    for part in [&net_bytes, &weather_bytes, &price_bytes] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.update(config.demand_factor.to_bits().to_le_bytes());
    for &hour in &config.event_hours {
        h.update((hour as u64).to_le_bytes());
    }
    let fingerprint = h.finalize().iter().map(|b| format!("{b:02x}")).collect();

    Ok(CaseInputs { grid, loads, weather, prices, fingerprint })
}
