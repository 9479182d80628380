//! ZIP voltage-dependent loads and curtailment.
//!
//! A ZIP load splits its baseline demand into constant-impedance (Z),
//! constant-current (I) and constant-power (P) shares:
//!
//! ```text
//! P = P0 [ cz (V/V0)^2 + ci (V/V0) + cp ]
//! ```
//!
//! and likewise for Q with its own coefficients. Lowering the voltage cuts
//! the Z and I shares; the P share is unaffected, so its current rises.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{BusId, RadialNetwork};
use crate::HOURS_PER_DAY;

const SUM_TOL: f64 = 1e-9;
const COEFF_BOUND: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum LoadError {
    #[error("voltage must be positive, got {0}")]
    NonPositiveVoltage(f64),
    #[error("curtailment fraction {0} outside [0, 1]")]
    CurtailmentOutOfRange(f64),
    #[error("{which} ZIP coefficients sum to {sum}, expected 1")]
    CoefficientSum { which: &'static str, sum: f64 },
    #[error("ZIP coefficient {0} outside [-2, 2]")]
    CoefficientRange(f64),
    #[error("load at bus {bus}: {reason}")]
    InvalidLoad { bus: BusId, reason: String },
    #[error("hour {0} outside the daily profile")]
    HourOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipCoefficients {
    pub cz_p: f64,
    pub ci_p: f64,
    pub cp_p: f64,
    pub cz_q: f64,
    pub ci_q: f64,
    pub cp_q: f64,
}

impl ZipCoefficients {
    pub fn new(cz_p: f64, ci_p: f64, cp_p: f64, cz_q: f64, ci_q: f64, cp_q: f64) -> Result<Self, LoadError> {
        let c = ZipCoefficients { cz_p, ci_p, cp_p, cz_q, ci_q, cp_q };
        c.validate()?;
        Ok(c)
    }

    /// Same split for active and reactive power.
    pub fn uniform(cz: f64, ci: f64, cp: f64) -> Result<Self, LoadError> {
        Self::new(cz, ci, cp, cz, ci, cp)
    }

    pub fn constant_power() -> Self {
        Self::uniform(0.0, 0.0, 1.0).expect("valid")
    }

    pub fn constant_impedance() -> Self {
        Self::uniform(1.0, 0.0, 0.0).expect("valid")
    }

    pub fn constant_current() -> Self {
        Self::uniform(0.0, 1.0, 0.0).expect("valid")
    }

    /// Sums must be 1 within 1e-9; nothing is renormalized.
    pub fn validate(&self) -> Result<(), LoadError> {
        for c in [self.cz_p, self.ci_p, self.cp_p, self.cz_q, self.ci_q, self.cp_q] {
            if !(c.abs() <= COEFF_BOUND) {
                return Err(LoadError::CoefficientRange(c));
            }
        }
        let sp = self.cz_p + self.ci_p + self.cp_p;
        if (sp - 1.0).abs() > SUM_TOL {
            return Err(LoadError::CoefficientSum { which: "active", sum: sp });
        }
        let sq = self.cz_q + self.ci_q + self.cp_q;
        if (sq - 1.0).abs() > SUM_TOL {
            return Err(LoadError::CoefficientSum { which: "reactive", sum: sq });
        }
        Ok(())
    }

    #[inline]
    pub fn active_factor(&self, ratio: f64) -> f64 {
        self.cz_p * ratio * ratio + self.ci_p * ratio + self.cp_p
    }

    #[inline]
    pub fn reactive_factor(&self, ratio: f64) -> f64 {
        self.cz_q * ratio * ratio + self.ci_q * ratio + self.cp_q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipLoad {
    pub bus: BusId,
    /// Hourly baseline active demand, kW.
    pub baseline_p_kw: Vec<f64>,
    /// Hourly baseline reactive demand, kvar.
    pub baseline_q_kvar: Vec<f64>,
    /// Voltage at which the baseline was observed, per-unit.
    pub ref_voltage_pu: f64,
    pub coefficients: ZipCoefficients,
    pub curtailable: bool,
    pub penalty_usd_per_kw: f64,
}

impl ZipLoad {
    pub fn validate(&self) -> Result<(), LoadError> {
        let bad = |reason: &str| LoadError::InvalidLoad { bus: self.bus, reason: reason.to_string() };
        if self.baseline_p_kw.len() != HOURS_PER_DAY || self.baseline_q_kvar.len() != HOURS_PER_DAY {
            return Err(bad("baseline profiles must have 24 hourly values"));
        }
        if self.baseline_p_kw.iter().any(|&p| !(p >= 0.0)) {
            return Err(bad("baseline active power must be non-negative"));
        }
        if self.baseline_q_kvar.iter().any(|q| !q.is_finite()) {
            return Err(bad("baseline reactive power must be finite"));
        }
        if !(0.9..=1.1).contains(&self.ref_voltage_pu) {
            return Err(bad("reference voltage must lie in [0.9, 1.1] pu"));
        }
        if !(self.penalty_usd_per_kw >= 0.0) {
            return Err(bad("penalty price must be non-negative"));
        }
        self.coefficients.validate()
    }

    /// Copy with every baseline value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ZipLoad {
        ZipLoad {
            baseline_p_kw: self.baseline_p_kw.iter().map(|p| p * factor).collect(),
            baseline_q_kvar: self.baseline_q_kvar.iter().map(|q| q * factor).collect(),
            ..self.clone()
        }
    }

    fn check(&self, hour: usize, v: f64) -> Result<(), LoadError> {
        if hour >= self.baseline_p_kw.len() {
            return Err(LoadError::HourOutOfRange(hour));
        }
        if !(v > 0.0) {
            return Err(LoadError::NonPositiveVoltage(v));
        }
        Ok(())
    }
}

/// Active demand of `load` at voltage magnitude `v` (per-unit), kW.
pub fn zip_active(load: &ZipLoad, hour: usize, v: f64) -> Result<f64, LoadError> {
    load.check(hour, v)?;
    Ok(load.baseline_p_kw[hour] * load.coefficients.active_factor(v / load.ref_voltage_pu))
}

/// Reactive demand of `load` at voltage magnitude `v` (per-unit), kvar.
pub fn zip_reactive(load: &ZipLoad, hour: usize, v: f64) -> Result<f64, LoadError> {
    load.check(hour, v)?;
    Ok(load.baseline_q_kvar[hour] * load.coefficients.reactive_factor(v / load.ref_voltage_pu))
}

/// Demand left after curtailing a fraction `chi` of the voltage-adjusted
/// load, `(kW, kvar)`.
pub fn effective_injection(load: &ZipLoad, hour: usize, v: f64, chi: f64) -> Result<(f64, f64), LoadError> {
    if !(0.0..=1.0).contains(&chi) {
        return Err(LoadError::CurtailmentOutOfRange(chi));
    }
    let keep = 1.0 - chi;
    Ok((keep * zip_active(load, hour, v)?, keep * zip_reactive(load, hour, v)?))
}

/// Loads bound to a network: each load is mapped to its BIBC column.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSet {
    loads: Vec<ZipLoad>,
    columns: Vec<usize>,
    curtailable: Vec<usize>,
}

impl LoadSet {
    pub fn new(network: &RadialNetwork, loads: Vec<ZipLoad>) -> Result<Self, LoadError> {
        let load_nodes = network.load_node_indices();
        let mut columns = Vec::with_capacity(loads.len());
        for load in &loads {
            load.validate()?;
            let bus = network
                .bus_index(load.bus)
                .ok_or_else(|| LoadError::InvalidLoad { bus: load.bus, reason: "unknown bus".into() })?;
            let column = load_nodes.iter().position(|&b| b == bus).ok_or_else(|| LoadError::InvalidLoad {
                bus: load.bus,
                reason: "loads cannot sit on the substation bus".into(),
            })?;
            columns.push(column);
        }
        let curtailable = loads.iter().enumerate().filter(|(_, l)| l.curtailable).map(|(i, _)| i).collect();
        Ok(LoadSet { loads, columns, curtailable })
    }

    pub fn loads(&self) -> &[ZipLoad] {
        &self.loads
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    /// BIBC column of each load.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Indices (into [`Self::loads`]) of the loads that may be curtailed.
    pub fn curtailable(&self) -> &[usize] {
        &self.curtailable
    }

    /// Same set with every baseline multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> LoadSet {
        LoadSet { loads: self.loads.iter().map(|l| l.scaled(factor)).collect(), ..self.clone() }
    }

    /// Total baseline active demand at `hour`, kW.
    pub fn baseline_total_kw(&self, hour: usize) -> f64 {
        self.loads.iter().map(|l| l.baseline_p_kw[hour]).sum()
    }
}
