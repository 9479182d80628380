//! Synthetic feeders and day profiles.
//!
//! `feeder20` is a 20-bus, 20 kV feeder behind a 110/20 kV transformer.
//! An overhead trunk with mostly constant-impedance residential load runs
//! away from the busbar; three short laterals straight off the busbar carry
//! constant-power-heavy commercial and industrial load and are the loads in
//! the curtailment program. The transformer is overloaded during hours
//! 10-21 at nominal voltage, so curtailment is needed without dynamic
//! ratings.
//!
//! `feeder5` is a small all-overhead feeder with round numbers for hand
//! checks.

use std::path::Path;

use super::ScenarioError;
use crate::grid::file::{BranchDoc, BusDoc, LoadDoc, NetworkDocument, ZipDoc, FORMAT_VERSION};
use crate::grid::{BusKind, ConductorClass};

/// Residential demand shape, fraction of peak per hour.
pub const RESIDENTIAL_PROFILE: [f64; 24] = [
    0.45, 0.42, 0.40, 0.40, 0.42, 0.48, 0.56, 0.62, 0.66, 0.70, 0.90, 0.91, 0.92, 0.92, 0.93, 0.94, 0.96,
    0.98, 1.00, 1.00, 0.97, 0.94, 0.70, 0.55,
];

/// Commercial and industrial demand shape, fraction of peak per hour.
pub const BUSINESS_PROFILE: [f64; 24] = [
    0.35, 0.35, 0.35, 0.35, 0.35, 0.40, 0.50, 0.62, 0.72, 0.78, 0.96, 0.98, 1.00, 0.98, 1.00, 1.00, 0.98,
    0.95, 0.92, 0.90, 0.90, 0.90, 0.55, 0.40,
];

/// Energy price, $/kWh.
pub const PRICES: [f64; 24] = [
    0.060, 0.055, 0.050, 0.050, 0.052, 0.058, 0.070, 0.085, 0.095, 0.105, 0.120, 0.130, 0.140, 0.145, 0.150,
    0.155, 0.160, 0.170, 0.180, 0.175, 0.160, 0.140, 0.100, 0.075,
];

const RESIDENTIAL_ZIP: ZipShares = ZipShares { p: (0.8, 0.1, 0.1), q: (0.8, 0.1, 0.1) };
const MIXED_ZIP: ZipShares = ZipShares { p: (0.4, 0.3, 0.3), q: (0.5, 0.2, 0.3) };
const COMMERCIAL_ZIP: ZipShares = ZipShares { p: (0.1, 0.1, 0.8), q: (0.2, 0.1, 0.7) };
const INDUSTRIAL_ZIP: ZipShares = ZipShares { p: (0.05, 0.05, 0.9), q: (0.1, 0.1, 0.8) };

#[derive(Clone, Copy)]
struct ZipShares {
    p: (f64, f64, f64),
    q: (f64, f64, f64),
}

impl ZipShares {
    fn doc(self) -> ZipDoc {
        ZipDoc { czp: self.p.0, cip: self.p.1, cpp: self.p.2, czq: self.q.0, ciq: self.q.1, cpq: self.q.2 }
    }
}

fn bus(id: u32, kind: BusKind, kv: f64) -> BusDoc {
    BusDoc { id, kind, kv }
}

fn branch(id: u32, from: u32, to: u32, r: f64, x: f64, class: ConductorClass, rating: f64) -> BranchDoc {
    BranchDoc { id, from, to, r_ohm: r, x_ohm: x, class, static_rating_a: rating, thermal: None }
}

#[allow(clippy::too_many_arguments)]
fn load(
    bus: u32,
    peak_kw: f64,
    power_factor: f64,
    profile: &[f64; 24],
    zip: ZipShares,
    penalty: Option<f64>,
) -> LoadDoc {
    let tan = (1.0 - power_factor * power_factor).sqrt() / power_factor;
    let round = |x: f64| (x * 1000.0).round() / 1000.0;
    LoadDoc {
        bus,
        p0_kw: profile.iter().map(|f| round(peak_kw * f)).collect(),
        q0_kvar: profile.iter().map(|f| round(peak_kw * f * tan)).collect(),
        v0_pu: 1.0,
        zip: zip.doc(),
        curtailable: penalty.is_some(),
        penalty_usd_per_kw: penalty.unwrap_or(0.0),
    }
}

/// The 20-bus overloaded feeder.
pub fn feeder20() -> NetworkDocument {
    use ConductorClass::*;
    let mut buses = vec![bus(1, BusKind::Substation, 110.0)];
    buses.extend((2..=20).map(|id| bus(id, BusKind::LoadNode, 20.0)));

    let mut branches = vec![branch(1, 1, 2, 0.20, 2.40, Transformer, 213.0)];
    // trunk 2-3-...-10
    let trunk_ratings = [300.0, 280.0, 250.0, 220.0, 190.0, 160.0, 140.0, 120.0];
    for (k, rating) in trunk_ratings.iter().enumerate() {
        let from = 2 + k as u32;
        branches.push(branch(2 + k as u32, from, from + 1, 0.45, 0.38, Overhead, *rating));
    }
    // business laterals off the busbar
    branches.push(branch(10, 2, 11, 0.30, 0.25, Overhead, 24.6));
    branches.push(branch(11, 2, 12, 0.35, 0.30, Overhead, 40.0));
    branches.push(branch(12, 2, 13, 0.40, 0.30, Overhead, 40.0));
    // residential laterals off the trunk
    branches.push(branch(13, 4, 14, 0.50, 0.40, Overhead, 80.0));
    branches.push(branch(14, 14, 15, 0.50, 0.40, Overhead, 60.0));
    branches.push(branch(15, 5, 20, 0.45, 0.35, Overhead, 60.0));
    branches.push(branch(16, 6, 16, 0.35, 0.15, Underground, 90.0));
    branches.push(branch(17, 8, 17, 0.50, 0.40, Overhead, 80.0));
    branches.push(branch(18, 17, 18, 0.50, 0.40, Overhead, 60.0));
    branches.push(branch(19, 10, 19, 0.50, 0.40, Overhead, 60.0));

    let mut loads = Vec::new();
    for b in 3..=10 {
        loads.push(load(b, 430.0, 0.95, &RESIDENTIAL_PROFILE, RESIDENTIAL_ZIP, None));
    }
    loads.push(load(11, 1000.0, 0.9, &BUSINESS_PROFILE, INDUSTRIAL_ZIP, Some(3.0)));
    loads.push(load(12, 700.0, 0.9, &BUSINESS_PROFILE, COMMERCIAL_ZIP, Some(5.0)));
    loads.push(load(13, 500.0, 0.92, &BUSINESS_PROFILE, MIXED_ZIP, Some(8.0)));
    for (b, kw) in [(14, 380.0), (15, 350.0), (20, 360.0), (17, 380.0), (18, 330.0), (19, 350.0)] {
        loads.push(load(b, kw, 0.95, &RESIDENTIAL_PROFILE, RESIDENTIAL_ZIP, None));
    }
    loads.push(load(16, 450.0, 0.92, &RESIDENTIAL_PROFILE, MIXED_ZIP, None));

    NetworkDocument {
        version: FORMAT_VERSION.into(),
        base_mva: Some(10.0),
        base_kv: Some(20.0),
        buses,
        branches,
        loads,
    }
}

/// A 5-bus feeder: substation 1, trunk 1-2-3, lateral 2-4-5.
pub fn feeder5() -> NetworkDocument {
    use ConductorClass::*;
    let mut buses = vec![bus(1, BusKind::Substation, 20.0)];
    buses.extend((2..=5).map(|id| bus(id, BusKind::LoadNode, 20.0)));
    let branches = vec![
        branch(1, 1, 2, 0.4, 0.8, Overhead, 300.0),
        branch(2, 2, 3, 0.4, 0.4, Overhead, 200.0),
        branch(3, 2, 4, 0.8, 0.4, Overhead, 200.0),
        branch(4, 4, 5, 0.4, 0.4, Overhead, 150.0),
    ];
    let flat = [1.0; 24];
    let loads = vec![
        load(2, 1000.0, 0.95, &flat, ZipShares { p: (0.0, 0.0, 1.0), q: (0.0, 0.0, 1.0) }, None),
        load(3, 1500.0, 0.95, &flat, RESIDENTIAL_ZIP, None),
        load(4, 800.0, 0.9, &flat, COMMERCIAL_ZIP, Some(2.0)),
        load(5, 1200.0, 0.95, &flat, MIXED_ZIP, Some(4.0)),
    ];
    NetworkDocument {
        version: FORMAT_VERSION.into(),
        base_mva: Some(10.0),
        base_kv: Some(20.0),
        buses,
        branches,
        loads,
    }
}

fn weather_csv(ambient: impl Fn(f64) -> f64, wind: impl Fn(f64) -> f64, peak_solar: f64) -> String {
    let mut out = String::from("hour,ambient_c,wind_mps,solar_wm2\n");
    for h in 0..24 {
        let t = h as f64;
        let solar = if (6.0..=20.0).contains(&t) {
            peak_solar * (std::f64::consts::PI * (t - 6.0) / 14.0).sin()
        } else {
            0.0
        };
        out.push_str(&format!("{h},{:.1},{:.2},{:.0}\n", ambient(t), wind(t), solar));
    }
    out
}

fn diurnal(mean: f64, swing: f64, t: f64) -> f64 {
    mean + swing * (std::f64::consts::PI * (t - 9.0) / 12.0).sin()
}

/// Cool, windy day: 14-24 C, 4-6 m/s.
pub fn cool_windy_weather() -> String {
    weather_csv(|t| diurnal(19.0, 5.0, t), |t| 5.0 + (std::f64::consts::PI * t / 12.0).cos(), 600.0)
}

/// Hot, nearly still day: 29-37 C, 0.7-0.9 m/s.
pub fn hot_still_weather() -> String {
    weather_csv(|t| diurnal(33.0, 4.0, t), |t| 0.8 + 0.1 * (std::f64::consts::PI * t / 12.0).cos(), 950.0)
}

pub fn prices_csv() -> String {
    let mut out = String::from("hour,usd_per_kwh\n");
    for (h, p) in PRICES.iter().enumerate() {
        out.push_str(&format!("{h},{p}\n"));
    }
    out
}

/// File names written by [`write_fixtures`].
pub const FEEDER20_FILE: &str = "feeder20.json";
pub const FEEDER5_FILE: &str = "feeder5.json";
pub const COOL_WINDY_FILE: &str = "weather_cool_windy.csv";
pub const HOT_STILL_FILE: &str = "weather_hot_still.csv";
pub const PRICES_FILE: &str = "prices.csv";

/// Every fixture file with its contents.
pub fn fixture_files() -> Vec<(&'static str, String)> {
    let json = |d: NetworkDocument| serde_json::to_string_pretty(&d).expect("serializable") + "\n";
    vec![
        (FEEDER20_FILE, json(feeder20())),
        (FEEDER5_FILE, json(feeder5())),
        (COOL_WINDY_FILE, cool_windy_weather()),
        (HOT_STILL_FILE, hot_still_weather()),
        (PRICES_FILE, prices_csv()),
    ]
}

pub fn write_fixtures(dir: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    for (name, text) in fixture_files() {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| ScenarioError::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::parse_weather_csv;

    #[test]
    fn fixtures_parse() {
        for doc in [feeder20(), feeder5()] {
            let f = doc.into_feeder().unwrap();
            crate::load::LoadSet::new(&f.network, f.loads).unwrap();
        }
        for w in [cool_windy_weather(), hot_still_weather()] {
            let series = parse_weather_csv(w.as_bytes()).unwrap();
            assert_eq!(series.samples().count(), 24);
        }
        let p = super::super::parse_prices_csv(prices_csv().as_bytes()).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn feeder20_shape() {
        let f = feeder20().into_feeder().unwrap();
        assert_eq!(f.network.buses.len(), 20);
        assert_eq!(f.network.branches.len(), 19);
        assert_eq!(f.network.root_transformers(), vec![0]);
        assert_eq!(f.loads.iter().filter(|l| l.curtailable).count(), 3);
    }

    #[test]
    fn checked_in_fixtures_are_current() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        for (name, text) in fixture_files() {
            let on_disk = std::fs::read_to_string(dir.join(name)).unwrap();
            assert_eq!(on_disk, text, "{name} is stale; regenerate with `gridpeak fixtures`");
        }
    }
}
