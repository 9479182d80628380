use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{ThermalError, WeatherSample};

/// Hourly weather for one day, indexed by hour of day.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    samples: Vec<Option<WeatherSample>>,
}

impl WeatherSeries {
    pub fn new(samples: Vec<WeatherSample>) -> Result<Self, ThermalError> {
        let mut slots: Vec<Option<WeatherSample>> = vec![None; crate::HOURS_PER_DAY];
        for s in samples {
            s.validate()?;
            if s.hour >= slots.len() {
                slots.resize(s.hour + 1, None);
            }
            if slots[s.hour].is_some() {
                return Err(ThermalError::Csv(format!("hour {} listed twice", s.hour)));
            }
            slots[s.hour] = Some(s);
        }
        Ok(WeatherSeries { samples: slots })
    }

    /// Same conditions at every hour of the day.
    pub fn constant(sample: WeatherSample) -> Self {
        WeatherSeries {
            samples: (0..crate::HOURS_PER_DAY).map(|h| Some(WeatherSample { hour: h, ..sample })).collect(),
        }
    }

    pub fn get(&self, hour: usize) -> Result<&WeatherSample, ThermalError> {
        self.samples.get(hour).and_then(Option::as_ref).ok_or(ThermalError::MissingWeather(hour))
    }

    pub fn samples(&self) -> impl Iterator<Item = &WeatherSample> {
        self.samples.iter().flatten()
    }
}

#[derive(Deserialize)]
struct Row {
    hour: usize,
    ambient_c: f64,
    wind_mps: f64,
    solar_wm2: f64,
}

/// Parses `hour,ambient_c,wind_mps,solar_wm2` CSV (header required).
pub fn parse_weather_csv<R: Read>(reader: R) -> Result<WeatherSeries, ThermalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| ThermalError::Csv(e.to_string()))?.clone();
    for required in ["hour", "ambient_c", "wind_mps", "solar_wm2"] {
        if !headers.iter().any(|h| h == required) {
            return Err(ThermalError::Csv(format!("missing column `{required}`")));
        }
    }
    let mut samples = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| ThermalError::Csv(e.to_string()))?;
        samples.push(WeatherSample {
            hour: row.hour,
            ambient_c: row.ambient_c,
            wind_mps: row.wind_mps,
            solar_wm2: row.solar_wm2,
        });
    }
    WeatherSeries::new(samples)
}

pub fn read_weather_csv(path: impl AsRef<Path>) -> Result<WeatherSeries, ThermalError> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| ThermalError::Csv(format!("{}: {e}", path.display())))?;
    parse_weather_csv(file)
}
