use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CaseInputs, ScenarioConfig, ScenarioError};
use crate::grid::{BranchId, BusId};
use crate::optimizer::{CaseMode, EventSchedule};

pub const SCHEDULE_FORMAT: &str = "gridpeak-schedule/1";

/// Contents of `schedule.json`: the optimized schedule plus enough network
/// context to rebuild every CSV table from this file alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub format: String,
    pub fingerprint: String,
    pub case_mode: CaseMode,
    pub seed: u64,
    pub demand_factor: f64,
    pub event_hours: Vec<usize>,
    pub voltage_hours: Vec<usize>,
    pub base_kw: f64,
    pub base_current_a: f64,
    pub bus_ids: Vec<BusId>,
    pub branch_ids: Vec<BranchId>,
    /// Hop count of each branch from the substation.
    pub branch_hops: Vec<usize>,
    /// Bus of each load, in load order.
    pub load_buses: Vec<BusId>,
    /// Indices of the loads in the curtailment program.
    pub curtailable: Vec<usize>,
    /// Baseline active demand of each load at each event hour, kW.
    pub baseline_kw: Vec<Vec<f64>>,
    pub schedule: EventSchedule,
}

impl ScheduleFile {
    pub fn new(config: &ScenarioConfig, inputs: &CaseInputs, schedule: EventSchedule) -> Self {
        let net = &inputs.grid.network;
        ScheduleFile {
            format: SCHEDULE_FORMAT.into(),
            fingerprint: inputs.fingerprint.clone(),
            case_mode: config.case_mode,
            seed: config.seed,
            demand_factor: config.demand_factor,
            event_hours: config.event_hours.clone(),
            voltage_hours: config.settings.voltage_hours.clone(),
            base_kw: net.base_kw(),
            base_current_a: net.base_current_a(),
            bus_ids: net.buses.iter().map(|b| b.id).collect(),
            branch_ids: net.branches.iter().map(|b| b.id).collect(),
            branch_hops: net.branch_depths(),
            load_buses: inputs.loads.loads().iter().map(|l| l.bus).collect(),
            curtailable: inputs.loads.curtailable().to_vec(),
            baseline_kw: config
                .event_hours
                .iter()
                .map(|&h| inputs.loads.loads().iter().map(|l| l.baseline_p_kw[h]).collect())
                .collect(),
            schedule,
        }
    }

    pub fn total_cost_usd(&self) -> f64 {
        self.schedule.total_cost_usd
    }

    /// Branch current magnitudes in amperes at `hour`, if that hour solved.
    pub fn currents_a(&self, hour: usize) -> Option<Vec<f64>> {
        let flow = self.schedule.hour(hour)?.flow.as_ref()?;
        Some(flow.section_currents.iter().map(|i| i.norm() * self.base_current_a).collect())
    }

    /// Curtailed baseline energy per load over the event, kWh.
    pub fn curtailed_kwh_by_load(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.load_buses.len()];
        for (h, row) in self.schedule.hours.iter().zip(&self.baseline_kw) {
            for (k, (&x, &p)) in h.chi.iter().zip(row).enumerate() {
                out[k] += x * p;
            }
        }
        out
    }
}

pub fn read_schedule(path: impl AsRef<Path>) -> Result<ScheduleFile, ScenarioError> {
    let path = path.as_ref();
    let path = if path.is_dir() { path.join("schedule.json") } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&path).map_err(|e| ScenarioError::io(&path, e))?;
    let file: ScheduleFile =
        serde_json::from_str(&text).map_err(|e| ScenarioError::Format(format!("{}: {e}", path.display())))?;
    if file.format != SCHEDULE_FORMAT {
        return Err(ScenarioError::Format(format!(
            "{}: unsupported format `{}`",
            path.display(),
            file.format
        )));
    }
    Ok(file)
}

pub(crate) fn money(x: f64) -> String {
    format!("{x:.2}")
}

pub(crate) fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), ScenarioError> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| ScenarioError::Format(format!("{}: {e}", path.display())))?;
    let fail = |e: csv::Error| ScenarioError::Format(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| ScenarioError::io(&path, e))
}

/// Writes `schedule.json`, `costs.csv`, `voltages.csv`, `currents.csv` and
/// `curtailment.csv` into `dir`.
pub fn write_artifacts(file: &ScheduleFile, dir: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    let json = serde_json::to_string_pretty(file).map_err(|e| ScenarioError::Format(e.to_string()))?;
    let path = dir.join("schedule.json");
    std::fs::write(&path, json + "\n").map_err(|e| ScenarioError::io(&path, e))?;

    let hours = &file.schedule.hours;
    let mut cost_rows: Vec<Vec<String>> = hours
        .iter()
        .map(|h| {
            vec![
                h.hour.to_string(),
                format!("{:.4}", h.price_usd_per_kwh),
                format!("{:.6}", h.v_sub),
                format!("{:.3}", h.purchased_kw),
                format!("{:.3}", h.curtailed_kw),
                money(h.energy_cost_usd),
                money(h.curtailment_cost_usd),
                money(h.total_cost_usd),
                h.feasible.to_string(),
            ]
        })
        .collect();
    cost_rows.push(vec![
        "total".into(),
        String::new(),
        String::new(),
        format!("{:.3}", hours.iter().map(|h| h.purchased_kw).sum::<f64>()),
        format!("{:.3}", file.schedule.curtailed_kwh()),
        money(hours.iter().map(|h| h.energy_cost_usd).sum()),
        money(hours.iter().map(|h| h.curtailment_cost_usd).sum()),
        money(file.schedule.total_cost_usd),
        file.schedule.all_feasible().to_string(),
    ]);
    write_csv(
        dir,
        "costs.csv",
        &[
            "hour",
            "price_usd_per_kwh",
            "v_sub_pu",
            "purchased_kw",
            "curtailed_kw",
            "energy_cost_usd",
            "curtailment_cost_usd",
            "total_cost_usd",
            "feasible",
        ],
        cost_rows,
    )?;

    let mut v_rows = Vec::new();
    for &vh in &file.voltage_hours {
        let Some(flow) = file.schedule.hour(vh).and_then(|h| h.flow.as_ref()) else {
            continue;
        };
        for (bus, v) in file.bus_ids.iter().zip(&flow.bus_voltages) {
            v_rows.push(vec![
                vh.to_string(),
                bus.to_string(),
                format!("{:.6}", v.norm()),
                format!("{:.4}", v.arg().to_degrees()),
            ]);
        }
    }
    write_csv(dir, "voltages.csv", &["hour", "bus", "v_pu", "angle_deg"], v_rows)?;

    let mut i_rows = Vec::new();
    for h in hours {
        let Some(currents) = file.currents_a(h.hour) else {
            continue;
        };
        for (s, &i) in currents.iter().enumerate() {
            let rating = h.ratings_a[s];
            i_rows.push(vec![
                h.hour.to_string(),
                file.branch_ids[s].to_string(),
                file.branch_hops[s].to_string(),
                format!("{i:.3}"),
                format!("{rating:.3}"),
                if rating > 0.0 { format!("{:.2}", 100.0 * i / rating) } else { String::new() },
            ]);
        }
    }
    write_csv(
        dir,
        "currents.csv",
        &["hour", "branch", "hops", "current_a", "rating_a", "loading_pct"],
        i_rows,
    )?;

    let mut c_rows = Vec::new();
    for (h, base) in hours.iter().zip(&file.baseline_kw) {
        for &k in &file.curtailable {
            c_rows.push(vec![
                h.hour.to_string(),
                file.load_buses[k].to_string(),
                format!("{:.6}", h.chi[k]),
                format!("{:.3}", h.chi[k] * base[k]),
            ]);
        }
    }
    write_csv(dir, "curtailment.csv", &["hour", "bus", "fraction", "curtailed_kw"], c_rows)
}
