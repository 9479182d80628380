//! Backward-forward sweep power flow on the BIBC formulation.
//!
//! With `Psi` the BIBC matrix and `Z_D` the diagonal of section impedances,
//! the bus-voltage drop from the substation is `Upsilon I` where
//! `Upsilon = Psi^T Z_D Psi`. Each sweep evaluates the ZIP loads at the
//! present voltages, turns them into current injections
//! `I_n = conj(S_n / V_n)`, and updates `V = V_0 - Upsilon I` until the
//! largest voltage change drops below tolerance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{build_bibc, BibcMatrix, GridError, RadialNetwork};
use crate::load::LoadSet;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid power-flow input: {0}")]
    InvalidInput(String),
    #[error("voltage collapse at iteration {iteration}: |V| = {magnitude:.4} pu at bus {bus}")]
    VoltageCollapse { iteration: usize, bus: u32, magnitude: f64 },
}

/// Section impedance diagonal and the bus-drop matrix `Psi^T Z_D Psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceMatrix {
    zd: Vec<Complex64>,
    upsilon: Vec<Complex64>,
    dim: usize,
}

impl ImpedanceMatrix {
    /// Section impedances in section order.
    pub fn zd(&self) -> &[Complex64] {
        &self.zd
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upsilon(&self, row: usize, col: usize) -> Complex64 {
        self.upsilon[row * self.dim + col]
    }

    pub fn upsilon_row(&self, row: usize) -> &[Complex64] {
        &self.upsilon[row * self.dim..(row + 1) * self.dim]
    }
}

/// Forms `Upsilon = Psi^T Z_D Psi` entry by entry.
pub fn build_upsilon(network: &RadialNetwork, bibc: &BibcMatrix) -> Result<ImpedanceMatrix, FlowError> {
    if network.branches.len() != bibc.sections() {
        return Err(FlowError::DimensionMismatch(format!(
            "{} branches but BIBC has {} rows",
            network.branches.len(),
            bibc.sections()
        )));
    }
    let zd: Vec<Complex64> = network.branches.iter().map(|b| b.impedance).collect();
    let dim = bibc.columns();
    let mut upsilon = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (s, &z) in zd.iter().enumerate() {
        let row = bibc.row(s);
        for a in (0..dim).filter(|&a| row[a] == 1) {
            for b in (0..dim).filter(|&b| row[b] == 1) {
                upsilon[a * dim + b] += z;
            }
        }
    }
    Ok(ImpedanceMatrix { zd, upsilon, dim })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Convergence threshold on the largest voltage change, pu.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Any bus magnitude below this aborts the solve, pu.
    pub collapse_pu: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerance: 1e-9, max_iterations: 100, collapse_pu: 0.5 }
    }
}

/// Admissible substation set-point range for a solve, pu.
pub const V_SUB_RANGE: (f64, f64) = (0.85, 1.1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowResult {
    pub v_sub: f64,
    /// Bus voltages in network bus order (substation included), pu.
    pub bus_voltages: Vec<Complex64>,
    /// Section currents in branch order, pu.
    pub section_currents: Vec<Complex64>,
    /// Magnitude of the root transformer current, pu.
    pub transformer_current: f64,
    /// Active load served after curtailment, kW.
    pub load_kw: f64,
    /// Reactive load served after curtailment, kvar.
    pub load_kvar: f64,
    /// `S_base sum r_s |I_s|^2`, kW.
    pub loss_kw: f64,
    /// Complex power leaving the substation, pu.
    pub substation_power: Complex64,
    pub iterations: usize,
    pub converged: bool,
}

impl PowerFlowResult {
    /// Purchased power: served load plus network loss, kW.
    pub fn purchased_kw(&self) -> f64 {
        self.load_kw + self.loss_kw
    }

    pub fn min_voltage(&self) -> f64 {
        self.bus_voltages.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_voltage(&self) -> f64 {
        self.bus_voltages.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Section current magnitudes in amperes.
    pub fn section_currents_a(&self, network: &RadialNetwork) -> Vec<f64> {
        let base = network.base_current_a();
        self.section_currents.iter().map(|i| i.norm() * base).collect()
    }

    /// JSON dump: `{v:[{bus,mag,ang}], i:[{section,mag,ang}], loss_kw, iters}`.
    /// Angles in degrees.
    pub fn to_debug_json(&self, network: &RadialNetwork) -> serde_json::Value {
        let v: Vec<_> = network
            .buses
            .iter()
            .zip(&self.bus_voltages)
            .map(|(b, v)| serde_json::json!({"bus": b.id, "mag": v.norm(), "ang": v.arg().to_degrees()}))
            .collect();
        let i: Vec<_> = network
            .branches
            .iter()
            .zip(&self.section_currents)
            .map(|(b, i)| serde_json::json!({"section": b.id, "mag": i.norm(), "ang": i.arg().to_degrees()}))
            .collect();
        serde_json::json!({"v": v, "i": i, "loss_kw": self.loss_kw, "iters": self.iterations})
    }
}

/// `S_base sum_s r_s |I_s|^2` in kW.
pub fn compute_loss(result: &PowerFlowResult, network: &RadialNetwork) -> f64 {
    network.base_kw()
        * network
            .branches
            .iter()
            .zip(&result.section_currents)
            .map(|(b, i)| b.impedance.re * i.norm_sqr())
            .sum::<f64>()
}

fn accumulate_demand(
    loads: &LoadSet,
    chi: &[f64],
    hour: usize,
    voltages: &[Complex64],
    base_kw: f64,
    demand: &mut [Complex64],
) {
    demand.fill(Complex64::new(0.0, 0.0));
    for ((load, &col), &x) in loads.loads().iter().zip(loads.columns()).zip(chi) {
        let ratio = voltages[col].norm() / load.ref_voltage_pu;
        let keep = 1.0 - x;
        let p = keep * load.baseline_p_kw[hour] * load.coefficients.active_factor(ratio);
        let q = keep * load.baseline_q_kvar[hour] * load.coefficients.reactive_factor(ratio);
        demand[col] += Complex64::new(p, q) / base_kw;
    }
}

/// Runs the sweep at substation voltage `v_sub` with curtailment fraction
/// `chi[k]` on load `k`. Non-convergence within the iteration cap is
/// reported through `converged`; a collapsing voltage is an error.
#[allow(clippy::too_many_arguments)]
pub fn solve(
    network: &RadialNetwork,
    bibc: &BibcMatrix,
    upsilon: &ImpedanceMatrix,
    loads: &LoadSet,
    chi: &[f64],
    v_sub: f64,
    hour: usize,
    options: &SolveOptions,
) -> Result<PowerFlowResult, FlowError> {
    if !(V_SUB_RANGE.0..=V_SUB_RANGE.1).contains(&v_sub) {
        return Err(FlowError::InvalidInput(format!(
            "substation voltage {v_sub} outside [{}, {}]",
            V_SUB_RANGE.0, V_SUB_RANGE.1
        )));
    }
    if chi.len() != loads.len() {
        return Err(FlowError::DimensionMismatch(format!(
            "{} curtailment fractions for {} loads",
            chi.len(),
            loads.len()
        )));
    }
    if let Some(&x) = chi.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(FlowError::InvalidInput(format!("curtailment fraction {x} outside [0, 1]")));
    }
    if hour >= crate::HOURS_PER_DAY {
        return Err(FlowError::InvalidInput(format!("hour {hour} outside the day")));
    }
    let n = bibc.columns();
    if upsilon.dim() != n {
        return Err(FlowError::DimensionMismatch("Upsilon and BIBC disagree".into()));
    }

    let base_kw = network.base_kw();
    let v0 = Complex64::new(v_sub, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![v0; n];
    let mut next = vec![zero; n];
    let mut demand = vec![zero; n];
    let mut inj = vec![zero; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        accumulate_demand(loads, chi, hour, &v, base_kw, &mut demand);
        for c in 0..n {
            inj[c] = (demand[c] / v[c]).conj();
        }
        let mut delta: f64 = 0.0;
        for (c, slot) in next.iter_mut().enumerate() {
            let drop: Complex64 = upsilon.upsilon_row(c).iter().zip(&inj).map(|(u, i)| u * i).sum();
            *slot = v0 - drop;
            delta = delta.max((*slot - v[c]).norm());
        }
        if let Some(c) = (0..n).find(|&c| !(next[c].norm() >= options.collapse_pu)) {
            return Err(FlowError::VoltageCollapse {
                iteration: iterations,
                bus: network.buses[bibc.column_buses()[c]].id,
                magnitude: next[c].norm(),
            });
        }
        std::mem::swap(&mut v, &mut next);
        if delta < options.tolerance {
            converged = true;
            break;
        }
    }

    // final injections consistent with the reported voltages
    accumulate_demand(loads, chi, hour, &v, base_kw, &mut demand);
    for c in 0..n {
        inj[c] = (demand[c] / v[c]).conj();
    }
    let section_currents = bibc.branch_currents(&inj);
    let total_inj: Complex64 = inj.iter().sum();
    let roots = network.root_transformers();
    let transformer_current = if roots.is_empty() {
        total_inj.norm()
    } else {
        roots.iter().map(|&s| section_currents[s].norm()).fold(0.0, f64::max)
    };

    let sub = network.substation_index().expect("validated network");
    let mut bus_voltages = vec![v0; network.buses.len()];
    for (c, &b) in bibc.column_buses().iter().enumerate() {
        bus_voltages[b] = v[c];
    }
    bus_voltages[sub] = v0;

    let load_total: Complex64 = demand.iter().sum::<Complex64>() * base_kw;
    let mut result = PowerFlowResult {
        v_sub,
        bus_voltages,
        section_currents,
        transformer_current,
        load_kw: load_total.re,
        load_kvar: load_total.im,
        loss_kw: 0.0,
        substation_power: v0 * total_inj.conj(),
        iterations,
        converged,
    };
    result.loss_kw = compute_loss(&result, network);
    Ok(result)
}

/// A validated network with its BIBC and impedance matrices, ready for
/// repeated solves. Immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct PreparedGrid {
    pub network: RadialNetwork,
    pub bibc: BibcMatrix,
    pub impedance: ImpedanceMatrix,
    pub options: SolveOptions,
}

impl PreparedGrid {
    pub fn new(network: RadialNetwork) -> Result<Self, GridError> {
        let bibc = build_bibc(&network)?;
        let impedance = build_upsilon(&network, &bibc).expect("BIBC built from this network");
        Ok(PreparedGrid { network, bibc, impedance, options: SolveOptions::default() })
    }

    pub fn solve(
        &self,
        loads: &LoadSet,
        chi: &[f64],
        v_sub: f64,
        hour: usize,
    ) -> Result<PowerFlowResult, FlowError> {
        solve(&self.network, &self.bibc, &self.impedance, loads, chi, v_sub, hour, &self.options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::test_support::network;
    use crate::load::{ZipCoefficients, ZipLoad};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pq_load(bus: u32, p_kw: f64, q_kvar: f64, coeffs: ZipCoefficients) -> ZipLoad {
        ZipLoad {
            bus,
            baseline_p_kw: vec![p_kw; 24],
            baseline_q_kvar: vec![q_kvar; 24],
            ref_voltage_pu: 1.0,
            coefficients: coeffs,
            curtailable: false,
            penalty_usd_per_kw: 0.0,
        }
    }

    #[test]
    fn upsilon_single_section() {
        let net = network(1, &[2], &[(1, 2)]);
        let psi = build_bibc(&net).unwrap();
        let u = build_upsilon(&net, &psi).unwrap();
        assert_eq!(u.upsilon(0, 0), c(0.01, 0.02));
    }

    #[test]
    fn upsilon_chain_and_star() {
        let mut net = network(1, &[2, 3], &[(1, 2), (2, 3)]);
        net.branches[0].impedance = c(0.01, 0.02);
        net.branches[1].impedance = c(0.03, 0.01);
        let u = build_upsilon(&net, &build_bibc(&net).unwrap()).unwrap();
        let (z1, z2) = (c(0.01, 0.02), c(0.03, 0.01));
        assert_eq!(u.upsilon(0, 0), z1);
        assert_eq!(u.upsilon(0, 1), z1);
        assert_eq!(u.upsilon(1, 0), z1);
        assert_eq!(u.upsilon(1, 1), z1 + z2);

        let mut star = network(1, &[2, 3, 4], &[(1, 2), (1, 3), (1, 4)]);
        for (k, b) in star.branches.iter_mut().enumerate() {
            b.impedance = c(0.01 * (k + 1) as f64, 0.02);
        }
        let u = build_upsilon(&star, &build_bibc(&star).unwrap()).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == b { star.branches[a].impedance } else { c(0.0, 0.0) };
                assert_eq!(u.upsilon(a, b), expected);
            }
        }
    }

    #[test]
    fn zero_load_is_flat() {
        let grid = PreparedGrid::new(network(1, &[2, 3], &[(1, 2), (2, 3)])).unwrap();
        let loads =
            LoadSet::new(&grid.network, vec![pq_load(3, 0.0, 0.0, ZipCoefficients::constant_power())])
                .unwrap();
        let r = grid.solve(&loads, &[0.0], 1.0, 12).unwrap();
        assert!(r.converged);
        assert!(r.bus_voltages.iter().all(|v| *v == c(1.0, 0.0)));
        assert!(r.section_currents.iter().all(|i| i.norm() == 0.0));
        assert_eq!(r.loss_kw, 0.0);
    }

    #[test]
    fn loss_by_direct_substitution() {
        let mut net = network(1, &[2], &[(1, 2)]);
        net.branches[0].impedance = c(0.01, 0.05);
        let r = PowerFlowResult {
            v_sub: 1.0,
            bus_voltages: vec![c(1.0, 0.0); 2],
            section_currents: vec![c(0.6, -0.8)],
            transformer_current: 1.0,
            load_kw: 0.0,
            load_kvar: 0.0,
            loss_kw: 0.0,
            substation_power: c(0.0, 0.0),
            iterations: 1,
            converged: true,
        };
        assert!((compute_loss(&r, &net) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = PreparedGrid::new(network(1, &[2], &[(1, 2)])).unwrap();
        let loads =
            LoadSet::new(&grid.network, vec![pq_load(2, 100.0, 10.0, ZipCoefficients::constant_power())])
                .unwrap();
        assert!(matches!(grid.solve(&loads, &[0.0], 0.5, 0), Err(FlowError::InvalidInput(_))));
        assert!(matches!(grid.solve(&loads, &[1.2], 1.0, 0), Err(FlowError::InvalidInput(_))));
        assert!(matches!(grid.solve(&loads, &[], 1.0, 0), Err(FlowError::DimensionMismatch(_))));
    }

    #[test]
    fn heavy_load_collapses() {
        let grid = PreparedGrid::new(network(1, &[2], &[(1, 2)])).unwrap();
        // 40 MW on a 10 MVA base through z = 0.01 + 0.02j is past the nose point
        let loads = LoadSet::new(
            &grid.network,
            vec![pq_load(2, 400_000.0, 100_000.0, ZipCoefficients::constant_power())],
        )
        .unwrap();
        assert!(matches!(grid.solve(&loads, &[0.0], 1.0, 0), Err(FlowError::VoltageCollapse { .. })));
    }

    #[test]
    fn debug_dump_shape() {
        let grid = PreparedGrid::new(network(1, &[2], &[(1, 2)])).unwrap();
        let loads =
            LoadSet::new(&grid.network, vec![pq_load(2, 1000.0, 200.0, ZipCoefficients::constant_power())])
                .unwrap();
        let r = grid.solve(&loads, &[0.0], 1.0, 0).unwrap();
        let j = r.to_debug_json(&grid.network);
        assert_eq!(j["v"].as_array().unwrap().len(), 2);
        assert_eq!(j["i"][0]["section"], 1);
        assert!(j["loss_kw"].as_f64().unwrap() > 0.0);
        assert!(j["iters"].as_u64().unwrap() > 1);
    }
}
