//! Small swarm problems on the 5-bus fixture and an exhaustive grid search
//! to score them against.

use gridpeak::load::{LoadSet, ZipCoefficients};
use gridpeak::optimizer::{evaluate, HourProblem};
use gridpeak::scenario::fixtures;
use gridpeak::{CaseMode, EventSpec, PreparedGrid, SwarmConfig};

pub const HOUR: usize = 12;
pub const GRID_STEP: f64 = 1e-4;

pub struct Setup {
    pub grid: PreparedGrid,
    pub loads: LoadSet,
    pub event: EventSpec,
    pub ratings: Vec<f64>,
}

impl Setup {
    pub fn problem(&self) -> HourProblem<'_> {
        let w = SwarmConfig::default().resolved_penalty_weight(&self.event, &self.loads);
        HourProblem {
            grid: &self.grid,
            loads: &self.loads,
            event: &self.event,
            hour: HOUR,
            ratings_a: &self.ratings,
            penalty_weight: w,
            divergence_penalty: 100.0 * w,
        }
    }
}

fn event(mode: CaseMode) -> EventSpec {
    EventSpec {
        event_hours: vec![HOUR],
        market_prices: vec![0.15; 24],
        mcl: 0.3,
        v_bounds: (0.9, 1.05),
        v_sub_bounds: (0.9, 1.05),
        case_mode: mode,
    }
}

/// Transformer rated below its nominal-voltage loading, so the best point
/// sits on the current limit.
fn tight_transformer(grid: &PreparedGrid, loads: &LoadSet, factor: f64) -> Vec<f64> {
    let base = grid.solve(loads, &vec![0.0; loads.len()], 1.0, HOUR).unwrap();
    let mut ratings: Vec<f64> = grid.network.branches.iter().map(|b| b.static_rating_a).collect();
    ratings[0] = factor * base.section_currents_a(&grid.network)[0];
    ratings.iter_mut().skip(1).for_each(|r| *r = 1e4);
    ratings
}

fn feeder5() -> (PreparedGrid, Vec<gridpeak::ZipLoad>) {
    let f = fixtures::feeder5().into_feeder().unwrap();
    (PreparedGrid::new(f.network).unwrap(), f.loads)
}

/// Static case, one participating load: the decision is its curtailment.
pub fn curtail_only() -> Setup {
    let (grid, mut loads) = feeder5();
    for l in &mut loads {
        l.curtailable = l.bus == 5;
    }
    let loads = LoadSet::new(&grid.network, loads).unwrap();
    let ratings = tight_transformer(&grid, &loads, 0.93);
    Setup { grid, loads, event: event(CaseMode::Static), ratings }
}

/// Voltage reduction with impedance loads and no participants: the decision
/// is the set-point.
pub fn setpoint_only() -> Setup {
    let (grid, mut loads) = feeder5();
    for l in &mut loads {
        l.curtailable = false;
        l.coefficients = ZipCoefficients::constant_impedance();
    }
    let loads = LoadSet::new(&grid.network, loads).unwrap();
    let ratings = vec![1e4; grid.network.branches.len()];
    Setup { grid, loads, event: event(CaseMode::Cvr), ratings }
}

/// Set-point and one curtailment together under a tight transformer.
pub fn setpoint_and_curtailment() -> Setup {
    let (grid, mut loads) = feeder5();
    for l in &mut loads {
        l.curtailable = l.bus == 5;
    }
    let loads = LoadSet::new(&grid.network, loads).unwrap();
    let ratings = tight_transformer(&grid, &loads, 0.93);
    Setup { grid, loads, event: event(CaseMode::Cvr), ratings }
}

fn feasible_cost(problem: &HourProblem<'_>, x: &[f64]) -> Option<f64> {
    let e = evaluate(x, problem);
    e.feasible().then(|| e.cost.unwrap().total_cost_usd)
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| (lo + k as f64 * step).min(hi)).collect()
}

/// Cheapest feasible cost over a 1e-4 lattice of the decision box. Two
/// dimensional boxes are searched coarse to fine: a 1e-2 lattice, then
/// 1e-3 around the best few cells, then 1e-4 around the best of those.
pub fn grid_search(problem: &HourProblem<'_>) -> (Vec<f64>, f64) {
    let bx = problem.decision_box();
    let best_of = |pts: Vec<Vec<f64>>| -> Vec<(Vec<f64>, f64)> {
        let mut out: Vec<(Vec<f64>, f64)> =
            pts.into_iter().filter_map(|x| feasible_cost(problem, &x).map(|c| (x, c))).collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        out
    };
    match bx.dim() {
        1 => {
            let pts = axis(bx.lo[0], bx.hi[0], GRID_STEP).into_iter().map(|x| vec![x]).collect();
            best_of(pts).into_iter().next().expect("some feasible point")
        }
        2 => {
            let lattice = |c: &[f64], half: f64, step: f64| -> Vec<Vec<f64>> {
                let a = axis((c[0] - half).max(bx.lo[0]), (c[0] + half).min(bx.hi[0]), step);
                let b = axis((c[1] - half).max(bx.lo[1]), (c[1] + half).min(bx.hi[1]), step);
                a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect()
            };
            let coarse = best_of(
                axis(bx.lo[0], bx.hi[0], 1e-2)
                    .iter()
                    .flat_map(|&x| axis(bx.lo[1], bx.hi[1], 1e-2).into_iter().map(move |y| vec![x, y]))
                    .collect(),
            );
            let mid = best_of(coarse.iter().take(5).flat_map(|(c, _)| lattice(c, 2e-2, 1e-3)).collect());
            best_of(mid.iter().take(3).flat_map(|(c, _)| lattice(c, 2e-3, GRID_STEP)).collect())
                .into_iter()
                .next()
                .expect("some feasible point")
        }
        d => panic!("grid search over {d} dimensions"),
    }
}
