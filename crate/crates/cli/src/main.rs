//! `gridpeak` command-line front end.
//!
//! Exit status is 0 when every optimized hour is feasible, 1 for bad input
//! and 2 when at least one hour (or sweep point) has no feasible solution.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gridpeak::flow::PreparedGrid;
use gridpeak::grid::load_feeder;
use gridpeak::load::LoadSet;
use gridpeak::scenario::{
    self, current_change_map, demand_factor_sweep, fixtures, parse_hour_range, read_schedule, run_case,
    run_comparison, write_sweep_csv, ScenarioConfig, Settings,
};
use gridpeak::CaseMode;

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "gridpeak", version, about = "Peak-load management with CVR, DTR and curtailment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one case over the event window.
    Run(RunArgs),
    /// Run static, cvr and cvr-dtr on the same inputs and compare them.
    Compare(CaseArgs),
    /// Lowest workable substation voltage across demand factors.
    Sweep(SweepArgs),
    /// Per-branch current change of one run against a baseline run.
    Currents(CurrentsArgs),
    /// Write the bundled synthetic feeders, weather and prices.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CaseArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    weather: PathBuf,
    #[arg(long)]
    prices: PathBuf,
    /// Inclusive event window, e.g. `10-21`.
    #[arg(long)]
    hours: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// JSON settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    demand_factor: Option<f64>,
    /// Evaluate particles on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct RunArgs {
    /// static, cvr or cvr-dtr.
    #[arg(long)]
    case: Option<CaseMode>,
    #[command(flatten)]
    common: CaseArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.7,0.85,0.9,0.95")]
    factors: Vec<f64>,
    /// Hour of the load profile to scale.
    #[arg(long, default_value_t = 9)]
    hour: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CurrentsArgs {
    /// Output directory (or schedule.json) of the reference run.
    #[arg(long)]
    baseline: PathBuf,
    /// Output directory (or schedule.json) of the run to compare.
    #[arg(long)]
    case: PathBuf,
    /// Where to write `current_change.csv`; defaults to the case directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Feasible,
    Infeasible,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRIDPEAK_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(Verdict::Feasible) => ExitCode::SUCCESS,
        Ok(Verdict::Infeasible) => ExitCode::from(EXIT_INFEASIBLE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn dispatch(command: Command) -> Result<Verdict> {
    match command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
        Command::Sweep(args) => sweep(args),
        Command::Currents(args) => currents(args),
        Command::Fixtures { out } => {
            fixtures::write_fixtures(&out)?;
            println!("wrote fixtures to {}", out.display());
            Ok(Verdict::Feasible)
        }
    }
}

fn read_settings(path: Option<&Path>) -> Result<Settings> {
    Ok(match path {
        Some(p) => Settings::read(p)?,
        None => Settings::default(),
    })
}

fn scenario_config(args: &CaseArgs, case: Option<CaseMode>) -> Result<ScenarioConfig> {
    let mut settings = read_settings(args.config.as_deref())?;
    if args.sequential {
        settings.swarm.parallel = false;
    }
    let case_mode = case.or(settings.case).unwrap_or(CaseMode::Static);
    let event_hours = match (&args.hours, &settings.event_hours) {
        (Some(text), _) => parse_hour_range(text)?,
        (None, Some(h)) => h.clone(),
        (None, None) => scenario::default_event_hours(),
    };
    Ok(ScenarioConfig {
        event_hours,
        seed: args.seed.unwrap_or(settings.swarm.seed),
        demand_factor: args.demand_factor.unwrap_or(settings.demand_factor),
        settings,
        ..ScenarioConfig::new(&args.network, &args.weather, &args.prices, case_mode, &args.out)
    })
}

fn run(args: RunArgs) -> Result<Verdict> {
    let config = scenario_config(&args.common, args.case)?;
    let file = run_case(&config)?;
    let infeasible = file.schedule.infeasible_hours();
    println!(
        "{}: total cost {:.2} USD, curtailed {:.1} kWh, hours {:?}",
        config.case_mode,
        file.total_cost_usd(),
        file.schedule.curtailed_kwh(),
        config.event_hours
    );
    println!("artifacts in {}", config.output_dir.display());
    if infeasible.is_empty() {
        Ok(Verdict::Feasible)
    } else {
        eprintln!("infeasible hours: {infeasible:?}");
        Ok(Verdict::Infeasible)
    }
}

fn compare(args: CaseArgs) -> Result<Verdict> {
    let config = scenario_config(&args, None)?;
    let (report, runs) = run_comparison(&config, &args.out)?;
    println!("{:<8} {:>14} {:>10} {:>14}", "case", "cost_usd", "reduction", "curtailed_kwh");
    for c in &report.cases {
        println!(
            "{:<8} {:>14.2} {:>9.2}% {:>14.1}",
            c.case_mode.as_str(),
            c.total_cost_usd,
            c.reduction_pct,
            c.curtailed_kwh
        );
    }
    println!("artifacts in {}", args.out.display());
    let mut verdict = Verdict::Feasible;
    for r in &runs {
        let bad = r.schedule.infeasible_hours();
        if !bad.is_empty() {
            eprintln!("{}: infeasible hours {bad:?}", r.case_mode);
            verdict = Verdict::Infeasible;
        }
    }
    Ok(verdict)
}

fn sweep(args: SweepArgs) -> Result<Verdict> {
    let settings = read_settings(args.config.as_deref())?;
    let feeder = load_feeder(&args.network).with_context(|| format!("reading {}", args.network.display()))?;
    let grid = PreparedGrid::new(feeder.network)?;
    let loads = LoadSet::new(&grid.network, feeder.loads)?;
    let points = demand_factor_sweep(&grid, &loads, args.hour, &args.factors, settings.v_bounds)?;
    write_sweep_csv(&points, &args.out)?;
    println!("{:>8} {:>12}", "factor", "min_v_sub");
    for p in &points {
        match p.min_v_sub {
            Some(v) => println!("{:>8} {:>12.6}", p.factor, v),
            None => println!("{:>8} {:>12}", p.factor, "infeasible"),
        }
    }
    if points.iter().all(|p| p.min_v_sub.is_some()) {
        Ok(Verdict::Feasible)
    } else {
        Ok(Verdict::Infeasible)
    }
}

fn currents(args: CurrentsArgs) -> Result<Verdict> {
    let baseline = read_schedule(&args.baseline)?;
    let case = read_schedule(&args.case)?;
    if baseline.fingerprint != case.fingerprint {
        bail!("the two runs used different inputs");
    }
    let changes = current_change_map(&case, &baseline)?;
    let dir = match args.out {
        Some(d) => d,
        None if args.case.is_dir() => args.case.clone(),
        None => args.case.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("current_change.csv");
    let mut w = csv_writer(&path)?;
    writeln!(w, "branch,hops,baseline_a,case_a,relative_change,abs_relative_change")?;
    for c in &changes {
        writeln!(
            w,
            "{},{},{:.3},{:.3},{:.6},{:.6}",
            c.branch, c.hops, c.baseline_a, c.case_a, c.relative_change, c.abs_relative_change
        )?;
    }
    w.flush()?;
    if let Some(top) = changes.iter().max_by(|a, b| a.relative_change.total_cmp(&b.relative_change)) {
        println!(
            "largest increase: branch {} ({} hops) {:+.2}%",
            top.branch,
            top.hops,
            100.0 * top.relative_change
        );
    }
    println!("wrote {}", path.display());
    Ok(Verdict::Feasible)
}

fn csv_writer(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}
