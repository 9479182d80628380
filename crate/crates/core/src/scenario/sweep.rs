//! Lowest workable substation voltage as the feeder gets more loaded.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::write_csv;
use super::ScenarioError;
use crate::flow::PreparedGrid;
use crate::load::LoadSet;
use crate::optimizer::flow_violations;

const BISECTION_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub factor: f64,
    /// `None` when even the upper voltage bound violates a limit.
    pub min_v_sub: Option<f64>,
}

fn feasible(
    grid: &PreparedGrid,
    loads: &LoadSet,
    hour: usize,
    v_sub: f64,
    ratings: &[f64],
    v_bounds: (f64, f64),
) -> bool {
    match grid.solve(loads, &vec![0.0; loads.len()], v_sub, hour) {
        Ok(flow) if flow.converged => flow_violations(&flow, grid, ratings, v_bounds).within_tolerance(),
        _ => false,
    }
}

/// For each demand factor, scales every baseline load and bisects the
/// substation voltage (no curtailment, static ratings) down to the lowest
/// value whose power flow respects the voltage and current limits. The
/// search runs over `v_bounds`.
pub fn demand_factor_sweep(
    grid: &PreparedGrid,
    loads: &LoadSet,
    hour: usize,
    factors: &[f64],
    v_bounds: (f64, f64),
) -> Result<Vec<SweepPoint>, ScenarioError> {
    if factors.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ScenarioError::Config("demand factors must be strictly ascending".into()));
    }
    if let Some(f) = factors.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
        return Err(ScenarioError::Config(format!("bad demand factor {f}")));
    }
    if hour >= crate::HOURS_PER_DAY {
        return Err(ScenarioError::Config(format!("hour {hour} outside the day")));
    }
    let (rlo, rhi) = crate::flow::V_SUB_RANGE;
    let (lo0, hi0) = (v_bounds.0.max(rlo), v_bounds.1.min(rhi));
    let ratings: Vec<f64> = grid.network.branches.iter().map(|b| b.static_rating_a).collect();

    Ok(factors
        .iter()
        .map(|&factor| {
            let scaled = loads.scaled(factor);
            let ok = |v: f64| feasible(grid, &scaled, hour, v, &ratings, v_bounds);
            let min_v_sub = if ok(lo0) {
                Some(lo0)
            } else if !ok(hi0) {
                None
            } else {
                let (mut lo, mut hi) = (lo0, hi0);
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if ok(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Some(hi)
            };
            log::debug!("demand factor {factor}: minimum v_sub {min_v_sub:?}");
            SweepPoint { factor, min_v_sub }
        })
        .collect())
}

pub fn write_sweep_csv(points: &[SweepPoint], dir: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    write_csv(
        dir,
        "sweep.csv",
        &["demand_factor", "min_v_sub_pu", "feasible"],
        points.iter().map(|p| {
            vec![
                format!("{}", p.factor),
                p.min_v_sub.map(|v| format!("{v:.6}")).unwrap_or_default(),
                p.min_v_sub.is_some().to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::test_support::network;
    use crate::load::{ZipCoefficients, ZipLoad};

    fn chain() -> (PreparedGrid, LoadSet) {
        let grid = PreparedGrid::new(network(1, &[2, 3], &[(1, 2), (2, 3)])).unwrap();
        let load = |bus, p: f64| ZipLoad {
            bus,
            baseline_p_kw: vec![p; 24],
            baseline_q_kvar: vec![0.3 * p; 24],
            ref_voltage_pu: 1.0,
            coefficients: ZipCoefficients::uniform(0.4, 0.3, 0.3).unwrap(),
            curtailable: false,
            penalty_usd_per_kw: 0.0,
        };
        let loads = LoadSet::new(&grid.network, vec![load(2, 3000.0), load(3, 4000.0)]).unwrap();
        (grid, loads)
    }

    #[test]
    fn tiny_load_sits_at_lower_bound() {
        let (grid, loads) = chain();
        let pts = demand_factor_sweep(&grid, &loads, 12, &[0.0, 1e-6], (0.9, 1.1)).unwrap();
        assert_eq!(pts[0].min_v_sub, Some(0.9));
        assert_eq!(pts[1].min_v_sub, Some(0.9));
    }

    #[test]
    fn heavier_load_needs_higher_voltage() {
        let (grid, loads) = chain();
        let pts = demand_factor_sweep(&grid, &loads, 12, &[0.5, 1.0, 1.5], (0.9, 1.1)).unwrap();
        let v: Vec<f64> = pts.iter().map(|p| p.min_v_sub.unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
    }

    #[test]
    fn unsorted_factors_rejected() {
        let (grid, loads) = chain();
        assert!(demand_factor_sweep(&grid, &loads, 12, &[1.0, 0.5], (0.9, 1.1)).is_err());
    }
}
