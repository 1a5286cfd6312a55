//! Command-line front end for the planning toolkit.
//!
//! Every subcommand loads a scenario document, runs one planning stage,
//! prints a one-line summary to stdout (or a JSON summary with `--json`),
//! and optionally writes result files under an output stem: `<stem>.json`
//! for the full result, `<stem>.csv` for tabular data, and a
//! `<stem>.run.json` sidecar holding run metadata so the data files stay
//! byte-reproducible.
//!
//! Exit codes: 0 on success, 1 for invalid input or an infeasible model,
//! 2 for internal failures.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ruralplan_core::capex::{
    self, backhaul_comparison, optimize_capex, relay_sweep, verify_capex_result, CapexError,
    CapexInputs,
};
use ruralplan_core::opex::{
    apply_power_saving, optimize_opex, plan_to_dispatch_csv, plan_to_summary_csv, verify_plan,
    OpexError, OpexOptions,
};
use ruralplan_core::scenario::{load_scenario_with, KeyPolicy, Scenario};
use ruralplan_core::topology::{build_plan, min_relay_count, TopologyError};

/// Default cellular backhaul deployment price [USD] used when the
/// comparison is run without an explicit baseline.
pub const DEFAULT_BACKHAUL_BASELINE_USD: f64 = 10_000.0;

/// Verification tolerance applied to every emitted result.
pub const EMIT_TOLERANCE: f64 = 1e-7;

#[derive(Parser)]
#[command(
    name = "ruralplan",
    version,
    about = "Plan rural wireless access deployments: topology, capital cost, energy schedule"
)]
pub struct Cli {
    /// Accept unknown scenario keys with a warning instead of an error.
    #[arg(long, global = true)]
    pub lenient: bool,
    /// Print summaries as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Cluster villages and build the gateway uplink topology.
    Plan {
        /// Scenario document (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Wi-Fi coverage radius [km]; defaults to the upper scenario bound.
        #[arg(long)]
        wifi_radius: Option<f64>,
        /// Output stem for the plan JSON and edge-list CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize deployment cost per user over radius and relay count.
    Capex {
        /// Scenario document (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Evaluate a single radius [km] instead of the scenario bounds.
        #[arg(long)]
        fixed_radius: Option<f64>,
        /// Force the relay count instead of using the topological minimum.
        #[arg(long)]
        fixed_nr: Option<u64>,
        /// Output stem for the result JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schedule energy purchases and size solar equipment.
    Opex {
        /// Scenario document (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Traffic level below which a slot falls back to the idle load.
        #[arg(long)]
        threshold: Option<f64>,
        /// Pin battery capacity [kWh] instead of sizing it.
        #[arg(long)]
        fixed_battery: Option<f64>,
        /// Output stem for the plan JSON, dispatch CSV, and summary CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate cost per user across relay counts at a fixed radius.
    SweepRelays {
        /// Scenario document (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Largest relay count to include.
        #[arg(long, default_value_t = 10)]
        max_nr: u64,
        /// Radius [km]; defaults to the capital-cost optimum.
        #[arg(long)]
        radius: Option<f64>,
        /// Output stem for the sweep CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the cellular backhaul baseline against fiber runs.
    CompareBackhaul {
        /// Scenario document (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Baseline backhaul price [USD].
        #[arg(long)]
        baseline: Option<f64>,
        /// Fiber run lengths [km], comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,3,50")]
        fiber_km: Vec<f64>,
        /// Output stem for the comparison CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed run, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or an infeasible model; exit code 1.
    Validation(String),
    /// A defect in the toolkit itself; exit code 2.
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Internal(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<CapexError> for Failure {
    fn from(e: CapexError) -> Self {
        match e {
            CapexError::GridTooCoarse(_) | CapexError::Topology(TopologyError::CyclicUplink { .. }) => {
                Failure::Internal(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<OpexError> for Failure {
    fn from(e: OpexError) -> Self {
        match e {
            OpexError::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::CyclicUplink { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let lenient = cli.lenient || std::env::var("RURALPLAN_LENIENT").as_deref() == Ok("1");
    match &cli.command {
        Command::Plan { scenario, wifi_radius, out } => {
            let scenario = load(scenario, lenient)?;
            cmd_plan(&scenario, *wifi_radius, out.as_deref(), cli.json)
        }
        Command::Capex { scenario, fixed_radius, fixed_nr, out } => {
            let scenario = load(scenario, lenient)?;
            cmd_capex(&scenario, *fixed_radius, *fixed_nr, out.as_deref(), cli.json)
        }
        Command::Opex { scenario, threshold, fixed_battery, out } => {
            let scenario = load(scenario, lenient)?;
            cmd_opex(&scenario, *threshold, *fixed_battery, out.as_deref(), cli.json)
        }
        Command::SweepRelays { scenario, max_nr, radius, out } => {
            let scenario = load(scenario, lenient)?;
            cmd_sweep(&scenario, *max_nr, *radius, out.as_deref(), cli.json)
        }
        Command::CompareBackhaul { scenario, baseline, fiber_km, out } => {
            let scenario = load(scenario, lenient)?;
            cmd_compare(&scenario, *baseline, fiber_km, out.as_deref(), cli.json)
        }
    }
}

fn load(path: &Path, lenient: bool) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    let policy = if lenient { KeyPolicy::Lenient } else { KeyPolicy::Strict };
    let loaded = load_scenario_with(&text, policy)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    for warning in &loaded.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(loaded.scenario)
}

fn warn_if_outside_bounds(radius: f64, bounds: (f64, f64)) {
    if radius < bounds.0 || radius > bounds.1 {
        eprintln!(
            "warning: fixed radius {radius} km outside bounds [{}, {}]",
            bounds.0, bounds.1
        );
    }
}

fn cmd_plan(
    scenario: &Scenario,
    wifi_radius: Option<f64>,
    out: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let bounds = scenario.radio.wifi_radius_bounds_km;
    let radius = wifi_radius.unwrap_or(bounds.1);
    if let Some(r) = wifi_radius {
        warn_if_outside_bounds(r, bounds);
    }
    let plan = build_plan(scenario, radius)?;
    if !plan.uncovered_villages.is_empty() {
        eprintln!("warning: unreachable villages: {}", plan.uncovered_villages.join(", "));
    }
    if json {
        println!(
            "{}",
            serde_json::json!({
                "n_A": plan.n_a,
                "n_R": plan.n_r,
                "uncovered": plan.uncovered_villages.len(),
            })
        );
    } else {
        println!("n_A={} n_R={} uncovered={}", plan.n_a, plan.n_r, plan.uncovered_villages.len());
    }
    if let Some(stem) = out {
        write_outputs(
            stem,
            "plan",
            &[(".json", plan.to_json_pretty()), (".csv", plan.edge_list_csv())],
        )?;
    }
    Ok(())
}

fn capex_inputs(
    scenario: &Scenario,
    fixed_radius: Option<f64>,
    fixed_nr: Option<u64>,
) -> Result<CapexInputs, Failure> {
    let mut inputs = CapexInputs::from_scenario(scenario)?;
    if let Some(radius) = fixed_radius {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Failure::Validation("fixed radius must be positive".to_string()));
        }
        warn_if_outside_bounds(radius, inputs.radius_bounds_km);
        inputs.radius_bounds_km = (radius, radius);
        inputs.min_relays = min_relay_count(scenario, radius)?;
    }
    if let Some(n_r) = fixed_nr {
        if n_r < inputs.min_relays {
            return Err(Failure::Validation(format!(
                "fixed n_R below topological minimum ({} < {})",
                n_r, inputs.min_relays
            )));
        }
        inputs.min_relays = n_r;
    }
    Ok(inputs)
}

fn cmd_capex(
    scenario: &Scenario,
    fixed_radius: Option<f64>,
    fixed_nr: Option<u64>,
    out: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let inputs = capex_inputs(scenario, fixed_radius, fixed_nr)?;
    let result = optimize_capex(&inputs)?;
    if !result.feasible {
        return Err(Failure::Validation(
            "no feasible deployment under the given bounds".to_string(),
        ));
    }
    let report = verify_capex_result(&inputs, &result, EMIT_TOLERANCE);
    if !report.passes() {
        return Err(Failure::Internal(format!(
            "result failed verification: {}",
            report.violations().join(", ")
        )));
    }
    if json {
        println!("{}", serde_json::to_string(&result).expect("result serializes"));
    } else {
        println!(
            "cost_per_user={} n_A={} n_R={} R_km={}",
            result.cost_per_user, result.n_a, result.n_r, result.r_star_km
        );
    }
    if let Some(stem) = out {
        write_outputs(stem, "capex", &[(".json", result.to_json_pretty())])?;
    }
    Ok(())
}

fn cmd_opex(
    scenario: &Scenario,
    threshold: Option<f64>,
    fixed_battery: Option<f64>,
    out: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let Some(energy) = &scenario.energy else {
        return Err(Failure::Validation("energy section required".to_string()));
    };
    let mut energy = energy.clone();
    if let Some(threshold) = threshold {
        let Some(traffic) = energy.traffic.clone() else {
            return Err(Failure::Validation(
                "traffic series required for power saving".to_string(),
            ));
        };
        energy.load =
            apply_power_saving(&energy.load, &traffic, threshold, energy.idle_load_kwh);
    }
    let options = OpexOptions { fixed_battery_kwh: fixed_battery };
    let plan = optimize_opex(&energy, &options)?;
    let report = verify_plan(&energy, &plan, EMIT_TOLERANCE)?;
    if !report.passes() {
        return Err(Failure::Internal(format!(
            "schedule failed verification: {}",
            report.violations().join(", ")
        )));
    }
    if json {
        println!(
            "{}",
            serde_json::json!({
                "total_cost": plan.total_cost,
                "a_p": plan.panel_area_m2,
                "e_b_max": plan.battery_capacity_kwh,
            })
        );
    } else {
        println!("total_cost={}", plan.total_cost);
    }
    if let Some(stem) = out {
        write_outputs(
            stem,
            "opex",
            &[
                (".json", plan.to_json_pretty()),
                (".csv", plan_to_dispatch_csv(&plan)),
                ("_summary.csv", plan_to_summary_csv(&plan)),
            ],
        )?;
    }
    Ok(())
}

fn cmd_sweep(
    scenario: &Scenario,
    max_nr: u64,
    radius: Option<f64>,
    out: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let inputs = capex_inputs(scenario, None, None)?;
    let radius = match radius {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(_) => return Err(Failure::Validation("radius must be positive".to_string())),
        None => {
            let best = optimize_capex(&inputs)?;
            if !best.feasible {
                return Err(Failure::Validation(
                    "no feasible deployment under the given bounds".to_string(),
                ));
            }
            best.r_star_km
        }
    };
    let series = relay_sweep(&inputs, 0..=max_nr, radius)?;
    if json {
        println!("{}", serde_json::json!({ "rows": series.len(), "radius_km": radius }));
    } else {
        println!("rows={} radius_km={}", series.len(), radius);
    }
    if let Some(stem) = out {
        write_outputs(stem, "sweep-relays", &[(".csv", capex::sweep_to_csv(&series))])?;
    }
    Ok(())
}

fn cmd_compare(
    scenario: &Scenario,
    baseline: Option<f64>,
    fiber_km: &[f64],
    out: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let baseline = baseline.unwrap_or_else(|| {
        eprintln!(
            "note: baseline defaults to {DEFAULT_BACKHAUL_BASELINE_USD} USD, a planning \
             estimate rather than a quoted price; override with --baseline"
        );
        DEFAULT_BACKHAUL_BASELINE_USD
    });
    let options = backhaul_comparison(&scenario.costs, baseline, fiber_km)?;
    if json {
        println!("{}", serde_json::to_string(&options).expect("options serialize"));
    } else {
        println!("options={}", options.len());
    }
    if let Some(stem) = out {
        write_outputs(stem, "compare-backhaul", &[(".csv", capex::backhaul_to_csv(&options))])?;
    }
    Ok(())
}

/// Writes `<stem><suffix>` for each file plus the run-metadata sidecar.
/// Timestamps live only in the sidecar, never in the data files.
fn write_outputs(stem: &Path, command: &str, files: &[(&str, String)]) -> Result<(), Failure> {
    if let Some(parent) = stem.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                Failure::Validation(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let sidecar = serde_json::json!({
        "tool": "ruralplan",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "created_unix": created_unix,
    });
    let mut all: Vec<(&str, String)> = files.to_vec();
    let sidecar_text = format!("{:#}\n", sidecar);
    all.push((".run.json", sidecar_text));
    for (suffix, content) in all {
        let path = PathBuf::from(format!("{}{}", stem.display(), suffix));
        fs::write(&path, content)
            .map_err(|e| Failure::Validation(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
