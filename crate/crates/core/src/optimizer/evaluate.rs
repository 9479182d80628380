use serde::{Deserialize, Serialize};

use super::swarm::DecisionBox;
use super::{EventSpec, CURRENT_TOL_A, MCL_TOL, NOMINAL_V_SUB, VOLTAGE_TOL_PU};
use crate::flow::{PowerFlowResult, PreparedGrid};
use crate::load::LoadSet;

/// Everything needed to price a candidate for one hour.
#[derive(Debug, Clone, Copy)]
pub struct HourProblem<'a> {
    pub grid: &'a PreparedGrid,
    pub loads: &'a LoadSet,
    pub event: &'a EventSpec,
    pub hour: usize,
    /// Ampacity of each branch for this hour.
    pub ratings_a: &'a [f64],
    pub penalty_weight: f64,
    pub divergence_penalty: f64,
}

impl HourProblem<'_> {
    fn voltage_dims(&self) -> usize {
        usize::from(self.event.case_mode.optimizes_voltage())
    }

    pub fn dimension(&self) -> usize {
        self.voltage_dims() + self.loads.curtailable().len()
    }

    pub fn decision_box(&self) -> DecisionBox {
        let mut lo = Vec::with_capacity(self.dimension());
        let mut hi = Vec::with_capacity(self.dimension());
        if self.event.case_mode.optimizes_voltage() {
            lo.push(self.event.v_sub_bounds.0);
            hi.push(self.event.v_sub_bounds.1);
        }
        for _ in self.loads.curtailable() {
            lo.push(0.0);
            hi.push(self.event.mcl);
        }
        DecisionBox { lo, hi }
    }

    /// Splits a position into the set-point and a per-load curtailment vector
    /// (zero for loads outside the program).
    pub fn decode(&self, position: &[f64]) -> (f64, Vec<f64>) {
        let skip = self.voltage_dims();
        let v_sub = if skip == 1 { position[0] } else { NOMINAL_V_SUB };
        let mut chi = vec![0.0; self.loads.len()];
        for (&k, &x) in self.loads.curtailable().iter().zip(&position[skip..]) {
            chi[k] = x;
        }
        (v_sub, chi)
    }

    /// Position for a given set-point and curtailment of every participating
    /// load.
    pub fn encode(&self, v_sub: f64, chi: &[f64]) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.dimension());
        if self.event.case_mode.optimizes_voltage() {
            p.push(v_sub);
        }
        p.extend(self.loads.curtailable().iter().map(|&k| chi[k]));
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub purchased_kw: f64,
    pub energy_cost_usd: f64,
    pub curtailment_cost_usd: f64,
    pub total_cost_usd: f64,
}

/// Summed constraint violations, with the single largest excess of each kind
/// kept for tolerance checks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Violations {
    pub voltage_pu: f64,
    pub current_a: f64,
    pub mcl: f64,
    pub worst_voltage_pu: f64,
    pub worst_current_a: f64,
    pub worst_mcl: f64,
}

impl Violations {
    pub fn total(&self) -> f64 {
        self.voltage_pu + self.current_a + self.mcl
    }

    pub fn within_tolerance(&self) -> bool {
        self.worst_voltage_pu <= VOLTAGE_TOL_PU
            && self.worst_current_a <= CURRENT_TOL_A
            && self.worst_mcl <= MCL_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub v_sub: f64,
    pub chi: Vec<f64>,
    /// `None` when the power flow collapsed or did not converge.
    pub cost: Option<CostBreakdown>,
    pub violations: Violations,
    /// Penalized cost the swarm minimizes.
    pub fitness: f64,
    pub flow: Option<PowerFlowResult>,
}

impl Evaluation {
    pub fn feasible(&self) -> bool {
        self.cost.is_some() && self.violations.within_tolerance()
    }
}

fn mcl_violations(chi: &[f64], mcl: f64) -> (f64, f64) {
    chi.iter().map(|&x| (x - mcl).max(0.0)).fold((0.0, 0.0), |(s, w), e| (s + e, w.max(e)))
}

/// Energy cost of purchased power plus curtailment payments.
pub fn hour_cost(
    flow: &PowerFlowResult,
    loads: &LoadSet,
    chi: &[f64],
    price_usd_per_kwh: f64,
    hour: usize,
) -> CostBreakdown {
    let purchased_kw = flow.purchased_kw();
    let energy_cost_usd = price_usd_per_kwh * purchased_kw;
    let curtailment_cost_usd = loads
        .curtailable()
        .iter()
        .map(|&k| {
            let l = &loads.loads()[k];
            l.penalty_usd_per_kw * chi[k] * l.baseline_p_kw[hour]
        })
        .sum::<f64>();
    CostBreakdown {
        purchased_kw,
        energy_cost_usd,
        curtailment_cost_usd,
        total_cost_usd: energy_cost_usd + curtailment_cost_usd,
    }
}

/// Voltage and branch-current violations of a solved flow.
pub fn flow_violations(
    flow: &PowerFlowResult,
    grid: &PreparedGrid,
    ratings_a: &[f64],
    v_bounds: (f64, f64),
) -> Violations {
    let mut out = Violations::default();
    for v in &flow.bus_voltages {
        let m = v.norm();
        let e = (v_bounds.0 - m).max(0.0) + (m - v_bounds.1).max(0.0);
        out.voltage_pu += e;
        out.worst_voltage_pu = out.worst_voltage_pu.max(e);
    }
    let base = grid.network.base_current_a();
    for (i, &rating) in flow.section_currents.iter().zip(ratings_a) {
        let e = (i.norm() * base - rating).max(0.0);
        out.current_a += e;
        out.worst_current_a = out.worst_current_a.max(e);
    }
    out
}

/// Prices one candidate: power flow at the decoded set-point and
/// curtailments, then cost plus `penalty_weight` times summed violations.
/// A failed power flow gets the fixed divergence penalty.
pub fn evaluate(position: &[f64], problem: &HourProblem<'_>) -> Evaluation {
    let (v_sub, chi) = problem.decode(position);
    let (mcl_sum, mcl_worst) = mcl_violations(&chi, problem.event.mcl);
    let flow_chi: Vec<f64> = chi.iter().map(|x| x.clamp(0.0, 1.0)).collect();
    let solved = problem.grid.solve(problem.loads, &flow_chi, v_sub, problem.hour);
    match solved {
        Ok(flow) if flow.converged => {
            let cost = hour_cost(&flow, problem.loads, &chi, problem.event.price(problem.hour), problem.hour);
            let mut violations =
                flow_violations(&flow, problem.grid, problem.ratings_a, problem.event.v_bounds);
            violations.mcl = mcl_sum;
            violations.worst_mcl = mcl_worst;
            Evaluation {
                v_sub,
                chi,
                fitness: cost.total_cost_usd + problem.penalty_weight * violations.total(),
                cost: Some(cost),
                violations,
                flow: Some(flow),
            }
        }
        _ => Evaluation {
            v_sub,
            chi,
            cost: None,
            violations: Violations { mcl: mcl_sum, worst_mcl: mcl_worst, ..Violations::default() },
            fitness: problem.divergence_penalty,
            flow: None,
        },
    }
}
