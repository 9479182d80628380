//! Case-study runs on the checked-in 20-bus fixture and an independent
//! audit of the schedules they produce.

use std::path::PathBuf;

use gridpeak::optimizer::{flow_violations, hour_cost, CURRENT_TOL_A, MCL_TOL, VOLTAGE_TOL_PU};
use gridpeak::scenario::{fixtures, load_inputs, run_loaded, CaseInputs, ScenarioConfig, ScheduleFile};
use gridpeak::CaseMode;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn config(weather: &str, mode: CaseMode, seed: u64) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(
        fixture(fixtures::FEEDER20_FILE),
        fixture(weather),
        fixture(fixtures::PRICES_FILE),
        mode,
        std::env::temp_dir(),
    );
    c.seed = seed;
    c
}

/// All three cases for one seed, in `CaseMode::ALL` order.
pub fn run_all(weather: &str, seed: u64) -> (CaseInputs, Vec<ScheduleFile>) {
    let base = config(weather, CaseMode::Static, seed);
    let inputs = load_inputs(&base).unwrap();
    let runs = CaseMode::ALL
        .iter()
        .map(|&mode| {
            let c = ScenarioConfig { case_mode: mode, ..base.clone() };
            ScheduleFile::new(&c, &inputs, run_loaded(&c, &inputs).unwrap())
        })
        .collect();
    (inputs, runs)
}

/// Re-solves every reported hour and checks costs, voltage and current
/// limits, curtailment limits and the totals.
pub fn audit(run: &ScheduleFile, inputs: &CaseInputs, config: &ScenarioConfig) -> Result<(), String> {
    let s = &config.settings;
    let loads = &inputs.loads;
    let mut total = 0.0;
    for h in &run.schedule.hours {
        let tag = format!("{} hour {}", run.case_mode, h.hour);
        if !h.feasible {
            return Err(format!("{tag}: reported infeasible"));
        }
        let flow = h.flow.as_ref().ok_or(format!("{tag}: no flow"))?;
        if run.case_mode == CaseMode::Static && h.v_sub != 1.0 {
            return Err(format!("{tag}: static case moved the set-point to {}", h.v_sub));
        }
        if !(s.v_sub_bounds.0..=s.v_sub_bounds.1).contains(&h.v_sub) {
            return Err(format!("{tag}: set-point {} out of range", h.v_sub));
        }
        for (k, &x) in h.chi.iter().enumerate() {
            let allowed = if loads.curtailable().contains(&k) { s.mcl } else { 0.0 };
            if x < 0.0 || x > allowed + MCL_TOL {
                return Err(format!("{tag}: load {k} curtailed {x}, allowed {allowed}"));
            }
        }

        let again = inputs.grid.solve(loads, &h.chi, h.v_sub, h.hour).map_err(|e| e.to_string())?;
        for (a, b) in again.bus_voltages.iter().zip(&flow.bus_voltages) {
            if (a - b).norm() > 1e-9 {
                return Err(format!("{tag}: stored flow does not reproduce"));
            }
        }
        let v = flow_violations(&again, &inputs.grid, &h.ratings_a, s.v_bounds);
        if v.worst_voltage_pu > VOLTAGE_TOL_PU || v.worst_current_a > CURRENT_TOL_A {
            return Err(format!("{tag}: limits violated {v:?}"));
        }
        if run.case_mode != CaseMode::CvrDtr {
            let stat: Vec<f64> = inputs.grid.network.branches.iter().map(|b| b.static_rating_a).collect();
            if h.ratings_a != stat {
                return Err(format!("{tag}: not on static ratings"));
            }
        }
        if let Some(peaks) = &h.hot_spot_peak_c {
            for (p, b) in peaks.iter().zip(&inputs.grid.network.branches) {
                if *p > b.thermal.hot_spot_limit_c + 0.5 {
                    return Err(format!("{tag}: branch {} reached {p:.2} C", b.id));
                }
            }
        }

        // energy at the hour's price plus payment for baseline demand shed
        let price = inputs.prices[h.hour];
        let purchased = again.purchased_kw();
        let paid: f64 = loads
            .loads()
            .iter()
            .zip(&h.chi)
            .map(|(l, &x)| l.penalty_usd_per_kw * x * l.baseline_p_kw[h.hour])
            .sum();
        let expected = price * purchased + paid;
        if (expected - h.total_cost_usd).abs() > 1e-6 * expected.max(1.0) {
            return Err(format!("{tag}: cost {} recomputed as {expected}", h.total_cost_usd));
        }
        let lib = hour_cost(&again, loads, &h.chi, price, h.hour);
        if (lib.total_cost_usd - expected).abs() > 1e-6 * expected.max(1.0) {
            return Err(format!("{tag}: cost breakdown disagrees"));
        }
        total += h.total_cost_usd;
    }
    if (total - run.total_cost_usd()).abs() > 1e-6 * total.max(1.0) {
        return Err(format!("{}: total {} vs sum {total}", run.case_mode, run.total_cost_usd()));
    }
    Ok(())
}
