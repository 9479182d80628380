//! `gridpeak-net/1` network files.
//!
//! ```json
//! {
//!   "version": "gridpeak-net/1",
//!   "base_mva": 10.0,
//!   "base_kv": 20.0,
//!   "buses":    [{"id": 1, "kind": "substation", "kv": 110.0}, ...],
//!   "branches": [{"id": 1, "from": 1, "to": 2, "r_ohm": 0.2, "x_ohm": 1.6,
//!                 "class": "transformer", "static_rating_a": 300.0,
//!                 "thermal": {"tau_h": [4.0]}}, ...],
//!   "loads":    [{"bus": 2, "p0_kw": [...24], "q0_kvar": [...24], "v0_pu": 1.0,
//!                 "zip": {"czp": 0.4, "cip": 0.3, "cpp": 0.3,
//!                         "czq": 0.4, "ciq": 0.3, "cpq": 0.3},
//!                 "curtailable": true, "penalty_usd_per_kw": 2.5}, ...]
//! }
//! ```
//!
//! Impedances are in ohms referred to `base_kv` and are converted to
//! per-unit on load. Every `thermal` field is optional and overrides the
//! class default; unless `calibrate_to_static` is `false`, the loss terms
//! are then scaled so the steady ampacity under worst-case weather equals
//! `static_rating_a`.

use std::collections::HashSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Branch, Bus, BusId, BusKind, ConductorClass, GridError, RadialNetwork};
use crate::load::{ZipCoefficients, ZipLoad};
use crate::thermal::{ConductorResistance, SurfaceExchange, ThermalLadderSpec, WeatherSample};

pub const FORMAT_VERSION: &str = "gridpeak-net/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub version: String,
    pub base_mva: Option<f64>,
    pub base_kv: Option<f64>,
    pub buses: Vec<BusDoc>,
    pub branches: Vec<BranchDoc>,
    #[serde(default)]
    pub loads: Vec<LoadDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusDoc {
    pub id: BusId,
    pub kind: BusKind,
    pub kv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchDoc {
    pub id: u32,
    pub from: BusId,
    pub to: BusId,
    pub r_ohm: f64,
    pub x_ohm: f64,
    pub class: ConductorClass,
    pub static_rating_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_h: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loop_resistances: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dielectric_rise_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hot_spot_limit_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_ref_ohm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_per_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_ref_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hot_spot_gradient_k_per_a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceExchange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate_to_static: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZipDoc {
    pub czp: f64,
    pub cip: f64,
    pub cpp: f64,
    pub czq: f64,
    pub ciq: f64,
    pub cpq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadDoc {
    pub bus: BusId,
    pub p0_kw: Vec<f64>,
    pub q0_kvar: Vec<f64>,
    pub v0_pu: f64,
    pub zip: ZipDoc,
    pub curtailable: bool,
    pub penalty_usd_per_kw: f64,
}

/// A network together with the loads attached to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Feeder {
    pub network: RadialNetwork,
    pub loads: Vec<ZipLoad>,
}

impl ThermalDoc {
    fn resolve(&self, class: ConductorClass, static_rating_a: f64) -> Result<ThermalLadderSpec, GridError> {
        let mut spec = ThermalLadderSpec::default_for(class);
        if let Some(t) = &self.tau_h {
            spec.time_constants_h = t.clone();
            if self.loop_resistances.is_none() && spec.loop_resistances.len() != t.len() {
                let share = spec.loop_resistances.iter().sum::<f64>() / t.len() as f64;
                spec.loop_resistances = vec![share; t.len()];
            }
        }
        if let Some(r) = &self.loop_resistances {
            spec.loop_resistances = r.clone();
        }
        if let Some(v) = self.dielectric_rise_k {
            spec.dielectric_rise_k = v;
        }
        if let Some(v) = self.hot_spot_limit_c {
            spec.hot_spot_limit_c = v;
        }
        let r = &mut spec.resistance;
        *r = ConductorResistance {
            r_ref_ohm: self.r_ref_ohm.unwrap_or(r.r_ref_ohm),
            alpha_per_k: self.alpha_per_k.unwrap_or(r.alpha_per_k),
            theta_ref_c: self.theta_ref_c.unwrap_or(r.theta_ref_c),
        };
        if let Some(v) = self.hot_spot_gradient_k_per_a2 {
            spec.hot_spot_gradient_k_per_a2 = v;
        }
        if self.surface.is_some() {
            spec.surface = self.surface;
        }
        spec.validate().map_err(|e| GridError::Schema(e.to_string()))?;
        if self.calibrate_to_static.unwrap_or(true) {
            spec.calibrate_to_rating(static_rating_a, &WeatherSample::STATIC_REFERENCE)
                .map_err(|e| GridError::Schema(format!("thermal calibration: {e}")))?;
        }
        Ok(spec)
    }
}

impl NetworkDocument {
    pub fn into_feeder(self) -> Result<Feeder, GridError> {
        if self.version != FORMAT_VERSION {
            return Err(GridError::Schema(format!(
                "unsupported version `{}`, expected `{FORMAT_VERSION}`",
                self.version
            )));
        }
        let base_mva = self.base_mva.ok_or_else(|| GridError::Units("missing base_mva".into()))?;
        let base_kv = self.base_kv.ok_or_else(|| GridError::Units("missing base_kv".into()))?;
        if !(base_mva > 0.0) || !(base_kv > 0.0) {
            return Err(GridError::Units("base power and voltage must be positive".into()));
        }
        let z_base = base_kv * base_kv / base_mva;

        let mut ids = HashSet::new();
        let mut buses = Vec::with_capacity(self.buses.len());
        for b in &self.buses {
            if !(b.kv > 0.0) {
                return Err(GridError::Units(format!("bus {} has non-positive kv", b.id)));
            }
            if !ids.insert(b.id) {
                return Err(GridError::Schema(format!("duplicate bus id {}", b.id)));
            }
            buses.push(Bus { id: b.id, kind: b.kind, nominal_kv: b.kv });
        }

        let mut branches = Vec::with_capacity(self.branches.len());
        for br in &self.branches {
            for bus in [br.from, br.to] {
                if !ids.contains(&bus) {
                    return Err(GridError::Schema(format!("branch {} references unknown bus {bus}", br.id)));
                }
            }
            if !(br.static_rating_a > 0.0) {
                return Err(GridError::Schema(format!("branch {} needs a positive static rating", br.id)));
            }
            let thermal = br.thermal.clone().unwrap_or_default().resolve(br.class, br.static_rating_a)?;
            branches.push(Branch {
                id: br.id,
                from_bus: br.from,
                to_bus: br.to,
                impedance: Complex64::new(br.r_ohm, br.x_ohm) / z_base,
                conductor_class: br.class,
                static_rating_a: br.static_rating_a,
                thermal,
            });
        }

        let mut loads = Vec::with_capacity(self.loads.len());
        for l in &self.loads {
            if !ids.contains(&l.bus) {
                return Err(GridError::Schema(format!("load references unknown bus {}", l.bus)));
            }
            let z = &l.zip;
            let coefficients = ZipCoefficients::new(z.czp, z.cip, z.cpp, z.czq, z.ciq, z.cpq)
                .map_err(|e| GridError::Schema(format!("load at bus {}: {e}", l.bus)))?;
            let load = ZipLoad {
                bus: l.bus,
                baseline_p_kw: l.p0_kw.clone(),
                baseline_q_kvar: l.q0_kvar.clone(),
                ref_voltage_pu: l.v0_pu,
                coefficients,
                curtailable: l.curtailable,
                penalty_usd_per_kw: l.penalty_usd_per_kw,
            };
            load.validate().map_err(|e| GridError::Schema(e.to_string()))?;
            loads.push(load);
        }

        Ok(Feeder { network: RadialNetwork { buses, branches, base_mva, base_kv }, loads })
    }
}

pub fn parse_network(text: &str) -> Result<Feeder, GridError> {
    let doc: NetworkDocument = serde_json::from_str(text)?;
    doc.into_feeder()
}

/// Reads a network file, converting impedances to per-unit.
pub fn load_network(path: impl AsRef<Path>) -> Result<RadialNetwork, GridError> {
    Ok(load_feeder(path)?.network)
}

/// Reads a network file along with its loads.
pub fn load_feeder(path: impl AsRef<Path>) -> Result<Feeder, GridError> {
    let text = std::fs::read_to_string(path)?;
    parse_network(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> serde_json::Value {
        serde_json::json!({
            "version": "gridpeak-net/1",
            "base_mva": 10.0,
            "base_kv": 20.0,
            "buses": [
                {"id": 1, "kind": "substation", "kv": 20.0},
                {"id": 2, "kind": "load-node", "kv": 20.0},
                {"id": 3, "kind": "load", "kv": 20.0}
            ],
            "branches": [
                {"id": 1, "from": 1, "to": 2, "r_ohm": 4.0, "x_ohm": 8.0,
                 "class": "overhead", "static_rating_a": 300.0},
                {"id": 2, "from": 2, "to": 3, "r_ohm": 1.0, "x_ohm": 1.0,
                 "class": "underground", "static_rating_a": 200.0,
                 "thermal": {"tau_h": [8.0], "calibrate_to_static": false}}
            ],
            "loads": [
                {"bus": 3, "p0_kw": vec![100.0; 24], "q0_kvar": vec![30.0; 24], "v0_pu": 1.0,
                 "zip": {"czp": 0.4, "cip": 0.3, "cpp": 0.3, "czq": 0.4, "ciq": 0.3, "cpq": 0.3},
                 "curtailable": true, "penalty_usd_per_kw": 2.0}
            ]
        })
    }

    #[test]
    fn converts_ohms_to_per_unit() {
        let feeder = parse_network(&doc().to_string()).unwrap();
        let z = feeder.network.branches[0].impedance;
        assert!((z.re - 4.0 * 10.0 / 400.0).abs() < 1e-15);
        assert!((z.im - 8.0 * 10.0 / 400.0).abs() < 1e-15);
        assert_eq!(feeder.loads.len(), 1);
        assert_eq!(feeder.network.buses[2].kind, BusKind::LoadNode);
    }

    #[test]
    fn unknown_bus_is_schema_violation() {
        let mut d = doc();
        d["branches"][1]["to"] = serde_json::json!(99);
        assert!(matches!(parse_network(&d.to_string()), Err(GridError::Schema(_))));
    }

    #[test]
    fn missing_base_power_is_unit_error() {
        let mut d = doc();
        d.as_object_mut().unwrap().remove("base_mva");
        assert!(matches!(parse_network(&d.to_string()), Err(GridError::Units(_))));
    }

    #[test]
    fn wrong_version_and_bad_json() {
        let mut d = doc();
        d["version"] = serde_json::json!("gridpeak-net/0");
        assert!(matches!(parse_network(&d.to_string()), Err(GridError::Schema(_))));
        assert!(matches!(parse_network("{"), Err(GridError::Parse(_))));
    }

    #[test]
    fn uncalibrated_thermal_block_used_as_given() {
        let feeder = parse_network(&doc().to_string()).unwrap();
        let cable = &feeder.network.branches[1].thermal;
        assert_eq!(cable.resistance, ThermalLadderSpec::default_for(ConductorClass::Underground).resistance);
    }
}
