//! Side-by-side comparison of the three cases.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::{money, write_csv};
use super::{load_inputs, run_loaded, ScenarioConfig, ScenarioError, ScheduleFile};
use crate::grid::BranchId;
use crate::optimizer::CaseMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case_mode: CaseMode,
    pub total_cost_usd: f64,
    /// Cost reduction relative to the static case, percent.
    pub reduction_pct: f64,
    pub curtailed_kwh: f64,
    pub hourly_cost_usd: Vec<f64>,
    pub hourly_purchased_kw: Vec<f64>,
    /// Curtailed energy per load over the event, kWh.
    pub curtailed_kwh_by_load: Vec<f64>,
    pub all_feasible: bool,
}

/// Relative change of one branch's current against a baseline run, over
/// the hours both runs solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchChange {
    pub branch: BranchId,
    pub hops: usize,
    pub baseline_a: f64,
    pub case_a: f64,
    /// `(I_case - I_base) / I_base`, with currents summed over the hours.
    pub relative_change: f64,
    /// `|I_case - I_base| / I_base`, averaged over the hours.
    pub abs_relative_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub fingerprint: String,
    pub event_hours: Vec<usize>,
    pub cases: Vec<CaseSummary>,
    /// Current change of every non-static case against the static case.
    pub current_changes: Vec<(CaseMode, Vec<BranchChange>)>,
}

impl ComparisonReport {
    pub fn case(&self, mode: CaseMode) -> Option<&CaseSummary> {
        self.cases.iter().find(|c| c.case_mode == mode)
    }
}

/// Per-branch relative current change of `case` against `baseline`.
pub fn current_change_map(
    case: &ScheduleFile,
    baseline: &ScheduleFile,
) -> Result<Vec<BranchChange>, ScenarioError> {
    if case.branch_ids != baseline.branch_ids {
        return Err(ScenarioError::Mismatch("runs are on different networks".into()));
    }
    let n = case.branch_ids.len();
    let mut sum_case = vec![0.0; n];
    let mut sum_base = vec![0.0; n];
    let mut sum_abs = vec![0.0; n];
    let mut hours = 0usize;
    for h in &case.event_hours {
        let (Some(ic), Some(ib)) = (case.currents_a(*h), baseline.currents_a(*h)) else {
            continue;
        };
        hours += 1;
        for s in 0..n {
            sum_case[s] += ic[s];
            sum_base[s] += ib[s];
            if ib[s] > 0.0 {
                sum_abs[s] += (ic[s] - ib[s]).abs() / ib[s];
            }
        }
    }
    let hours_f = hours.max(1) as f64;
    Ok((0..n)
        .map(|s| BranchChange {
            branch: case.branch_ids[s],
            hops: case.branch_hops[s],
            baseline_a: sum_base[s] / hours_f,
            case_a: sum_case[s] / hours_f,
            relative_change: if sum_base[s] > 0.0 { (sum_case[s] - sum_base[s]) / sum_base[s] } else { 0.0 },
            abs_relative_change: sum_abs[s] / hours_f,
        })
        .collect())
}

/// Lines up completed runs. All runs must come from the same inputs and one
/// of them must be the static case, which serves as the reference.
pub fn compare_cases(runs: &[ScheduleFile]) -> Result<ComparisonReport, ScenarioError> {
    let reference = runs
        .iter()
        .find(|r| r.case_mode == CaseMode::Static)
        .ok_or_else(|| ScenarioError::Mismatch("comparison needs a static-case run".into()))?;
    for r in runs {
        if r.fingerprint != reference.fingerprint {
            return Err(ScenarioError::Mismatch(format!(
                "{} run used different network, weather, prices, demand factor or hours",
                r.case_mode
            )));
        }
    }
    let base_cost = reference.total_cost_usd();
    let cases = runs
        .iter()
        .map(|r| CaseSummary {
            case_mode: r.case_mode,
            total_cost_usd: r.total_cost_usd(),
            reduction_pct: if base_cost > 0.0 {
                100.0 * (base_cost - r.total_cost_usd()) / base_cost
            } else {
                0.0
            },
            curtailed_kwh: r.schedule.curtailed_kwh(),
            hourly_cost_usd: r.schedule.hours.iter().map(|h| h.total_cost_usd).collect(),
            hourly_purchased_kw: r.schedule.hours.iter().map(|h| h.purchased_kw).collect(),
            curtailed_kwh_by_load: r.curtailed_kwh_by_load(),
            all_feasible: r.schedule.all_feasible(),
        })
        .collect();
    let current_changes = runs
        .iter()
        .filter(|r| r.case_mode != CaseMode::Static)
        .map(|r| Ok((r.case_mode, current_change_map(r, reference)?)))
        .collect::<Result<_, ScenarioError>>()?;
    Ok(ComparisonReport {
        fingerprint: reference.fingerprint.clone(),
        event_hours: reference.event_hours.clone(),
        cases,
        current_changes,
    })
}

/// Writes `comparison.json` and the comparison tables into `dir`.
pub fn write_comparison(
    report: &ComparisonReport,
    runs: &[ScheduleFile],
    dir: &Path,
) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    let path = dir.join("comparison.json");
    let json = serde_json::to_string_pretty(report).map_err(|e| ScenarioError::Format(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(|e| ScenarioError::io(&path, e))?;

    write_csv(
        dir,
        "comparison_costs.csv",
        &["case", "total_cost_usd", "reduction_pct", "curtailed_kwh", "all_feasible"],
        report.cases.iter().map(|c| {
            vec![
                c.case_mode.to_string(),
                money(c.total_cost_usd),
                format!("{:.2}", c.reduction_pct),
                format!("{:.3}", c.curtailed_kwh),
                c.all_feasible.to_string(),
            ]
        }),
    )?;

    let mut header = vec!["hour".to_string()];
    for c in &report.cases {
        header.push(format!("purchased_kw_{}", c.case_mode));
        header.push(format!("cost_usd_{}", c.case_mode));
    }
    let rows = report.event_hours.iter().enumerate().map(|(i, h)| {
        let mut row = vec![h.to_string()];
        for c in &report.cases {
            row.push(format!("{:.3}", c.hourly_purchased_kw[i]));
            row.push(money(c.hourly_cost_usd[i]));
        }
        row
    });
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(dir, "comparison_hourly.csv", &header_refs, rows)?;

    if let Some(first) = runs.first() {
        let mut header = vec!["bus".to_string()];
        header.extend(report.cases.iter().map(|c| format!("curtailed_kwh_{}", c.case_mode)));
        let rows = first.curtailable.iter().map(|&k| {
            let mut row = vec![first.load_buses[k].to_string()];
            row.extend(report.cases.iter().map(|c| format!("{:.3}", c.curtailed_kwh_by_load[k])));
            row
        });
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(dir, "comparison_curtailment.csv", &header_refs, rows)?;

        let mut header = vec!["hour".to_string(), "bus".to_string()];
        header.extend(runs.iter().map(|r| format!("v_pu_{}", r.case_mode)));
        let mut rows = Vec::new();
        for &vh in &first.voltage_hours {
            let flows: Option<Vec<_>> =
                runs.iter().map(|r| r.schedule.hour(vh).and_then(|h| h.flow.as_ref())).collect();
            let Some(flows) = flows else { continue };
            for (b, bus) in first.bus_ids.iter().enumerate() {
                let mut row = vec![vh.to_string(), bus.to_string()];
                row.extend(flows.iter().map(|f| format!("{:.6}", f.bus_voltages[b].norm())));
                rows.push(row);
            }
        }
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(dir, "comparison_voltages.csv", &header_refs, rows)?;
    }

    for (mode, changes) in &report.current_changes {
        write_csv(
            dir,
            &format!("current_change_{mode}.csv"),
            &["branch", "hops", "baseline_a", "case_a", "relative_change", "abs_relative_change"],
            changes.iter().map(|c| {
                vec![
                    c.branch.to_string(),
                    c.hops.to_string(),
                    format!("{:.3}", c.baseline_a),
                    format!("{:.3}", c.case_a),
                    format!("{:.6}", c.relative_change),
                    format!("{:.6}", c.abs_relative_change),
                ]
            }),
        )?;
    }
    Ok(())
}

/// Runs all three cases on the same inputs into `out/<case>/` and writes the
/// comparison into `out`. The case mode in `base` is ignored.
pub fn run_comparison(
    base: &ScenarioConfig,
    out: &Path,
) -> Result<(ComparisonReport, Vec<ScheduleFile>), ScenarioError> {
    base.validate()?;
    let inputs = load_inputs(base)?;
    let mut runs = Vec::with_capacity(3);
    for mode in CaseMode::ALL {
        let config = ScenarioConfig { case_mode: mode, output_dir: out.join(mode.as_str()), ..base.clone() };
        let schedule = run_loaded(&config, &inputs)?;
        let file = ScheduleFile::new(&config, &inputs, schedule);
        super::write_artifacts(&file, &config.output_dir)?;
        runs.push(file);
    }
    let report = compare_cases(&runs)?;
    write_comparison(&report, &runs, out)?;
    Ok((report, runs))
}
