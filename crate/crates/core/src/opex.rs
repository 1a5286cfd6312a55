//! Operating-cost scheduler: sizes solar panel area and battery capacity
//! and dispatches grid, solar, and battery energy across tariff slots by
//! linear programming.
//!
//! Per slot `t` the model splits each source into its destinations: grid
//! import `e_g` into `e_g_l` (load) and `e_g_b` (battery), solar yield
//! `e_p` into `e_p_l` and `e_p_b`, and battery draw `e_b_l` into the load.
//! Charging stores `rho` per unit pushed, discharging delivers `phi` per
//! unit drawn, and panels yield `gamma * solar[t]` per m², so energy can be
//! bought, converted, and stored but never created.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{ConstraintSense, LinearProgram, LpStatus};
use crate::report::ConstraintReport;
use crate::scenario::{EnergyScenario, ScenarioError};

#[derive(Debug, Error)]
pub enum OpexError {
    #[error("energy model is infeasible")]
    Infeasible,
    #[error("series length {got} does not match {want} slots")]
    DimensionMismatch { want: usize, got: usize },
    #[error("fixed battery capacity must be nonnegative and finite")]
    InvalidFixedBattery,
    #[error("internal solver failure: {0}")]
    Internal(String),
    #[error("malformed series: {0}")]
    MalformedCsv(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Scheduler options beyond the scenario itself.
#[derive(Debug, Clone, Default)]
pub struct OpexOptions {
    /// Pin battery capacity to this value instead of sizing it; its
    /// capital cost still enters the objective.
    pub fixed_battery_kwh: Option<f64>,
}

/// Sized equipment and the full dispatch schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyPlan {
    /// Grid import per slot [kWh].
    #[serde(rename = "e_g")]
    pub grid_import: Vec<f64>,
    /// Solar yield per slot [kWh].
    #[serde(rename = "e_p")]
    pub solar_yield: Vec<f64>,
    /// Battery state at the end of each slot [kWh].
    #[serde(rename = "e_b")]
    pub battery_level: Vec<f64>,
    /// Grid energy sent to the load [kWh].
    #[serde(rename = "e_g_l")]
    pub grid_to_load: Vec<f64>,
    /// Grid energy sent to the battery [kWh].
    #[serde(rename = "e_g_b")]
    pub grid_to_battery: Vec<f64>,
    /// Solar energy sent to the load [kWh].
    #[serde(rename = "e_p_l")]
    pub solar_to_load: Vec<f64>,
    /// Solar energy sent to the battery [kWh].
    #[serde(rename = "e_p_b")]
    pub solar_to_battery: Vec<f64>,
    /// Battery energy drawn for the load [kWh].
    #[serde(rename = "e_b_l")]
    pub battery_to_load: Vec<f64>,
    /// Installed panel area [m²].
    #[serde(rename = "a_p")]
    pub panel_area_m2: f64,
    /// Installed battery capacity [kWh].
    #[serde(rename = "e_b_max")]
    pub battery_capacity_kwh: f64,
    /// Grid energy bill plus panel and battery capital [USD].
    pub total_cost: f64,
}

impl EnergyPlan {
    pub fn slots(&self) -> usize {
        self.grid_import.len()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Variable kinds, laid out as `kind * slots + t`; the two sizing scalars
/// sit after all flow blocks.
#[derive(Clone, Copy)]
enum Flow {
    GridToLoad = 0,
    GridToBattery = 1,
    SolarToLoad = 2,
    SolarToBattery = 3,
    BatteryToLoad = 4,
    GridImport = 5,
    SolarYield = 6,
    BatteryLevel = 7,
}

const FLOW_KINDS: usize = 8;

fn var(kind: Flow, t: usize, slots: usize) -> usize {
    kind as usize * slots + t
}

fn panel_var(slots: usize) -> usize {
    FLOW_KINDS * slots
}

fn capacity_var(slots: usize) -> usize {
    FLOW_KINDS * slots + 1
}

/// Builds the scheduling program: `8 * slots + 2` variables and six rows
/// per slot (source splits, battery recursion, load coverage, solar yield,
/// capacity), plus one equality when the battery size is pinned. Slots with
/// grid marked unavailable get a zero upper bound on their import.
pub fn build_energy_lp(
    energy: &EnergyScenario,
    fixed_battery_kwh: Option<f64>,
) -> Result<LinearProgram, OpexError> {
    energy.validate()?;
    if let Some(cap) = fixed_battery_kwh {
        if !(cap >= 0.0) || !cap.is_finite() {
            return Err(OpexError::InvalidFixedBattery);
        }
    }
    let slots = energy.slots;
    let n = FLOW_KINDS * slots + 2;
    let rho = energy.charge_efficiency;
    let phi = energy.discharge_efficiency;
    let gamma = energy.panel_efficiency;

    let mut lp = LinearProgram::new(n);
    let mut objective = vec![0.0; n];
    for t in 0..slots {
        objective[var(Flow::GridImport, t, slots)] = energy.grid_price[t];
    }
    objective[panel_var(slots)] = energy.panel_cost_per_m2;
    objective[capacity_var(slots)] = energy.battery_cost_per_kwh;
    lp.set_objective(objective);

    let mut row = |entries: &[(usize, f64)], sense: ConstraintSense, rhs: f64| {
        let mut coefficients = vec![0.0; n];
        for &(j, c) in entries {
            coefficients[j] = c;
        }
        lp.add_constraint(coefficients, sense, rhs);
    };

    for t in 0..slots {
        row(
            &[
                (var(Flow::GridToLoad, t, slots), 1.0),
                (var(Flow::GridToBattery, t, slots), 1.0),
                (var(Flow::GridImport, t, slots), -1.0),
            ],
            ConstraintSense::Le,
            0.0,
        );
        row(
            &[
                (var(Flow::SolarToLoad, t, slots), 1.0),
                (var(Flow::SolarToBattery, t, slots), 1.0),
                (var(Flow::SolarYield, t, slots), -1.0),
            ],
            ConstraintSense::Le,
            0.0,
        );
        // e_b(t) <= e_b(t-1) + rho * charge - draw, with the initial state
        // on the right-hand side for the first slot.
        let mut recursion = vec![
            (var(Flow::BatteryLevel, t, slots), 1.0),
            (var(Flow::BatteryToLoad, t, slots), 1.0),
            (var(Flow::GridToBattery, t, slots), -rho),
            (var(Flow::SolarToBattery, t, slots), -rho),
        ];
        let rhs = if t == 0 {
            energy.initial_battery_kwh
        } else {
            recursion.push((var(Flow::BatteryLevel, t - 1, slots), -1.0));
            0.0
        };
        row(&recursion, ConstraintSense::Le, rhs);
        row(
            &[
                (var(Flow::GridToLoad, t, slots), 1.0),
                (var(Flow::SolarToLoad, t, slots), 1.0),
                (var(Flow::BatteryToLoad, t, slots), phi),
            ],
            ConstraintSense::Ge,
            energy.load[t],
        );
        row(
            &[
                (var(Flow::SolarYield, t, slots), 1.0),
                (panel_var(slots), -gamma * energy.solar[t]),
            ],
            ConstraintSense::Eq,
            0.0,
        );
        row(
            &[(var(Flow::BatteryLevel, t, slots), 1.0), (capacity_var(slots), -1.0)],
            ConstraintSense::Le,
            0.0,
        );
    }
    if let Some(cap) = fixed_battery_kwh {
        row(&[(capacity_var(slots), 1.0)], ConstraintSense::Eq, cap);
    }
    if let Some(mask) = &energy.grid_available {
        for (t, &available) in mask.iter().enumerate() {
            if !available {
                lp.add_upper_bound(var(Flow::GridImport, t, slots), 0.0);
            }
        }
    }
    Ok(lp)
}

/// Solves the scheduling program and extracts the plan. The reported cost
/// is recomputed from the extracted flows in slot order, not read back from
/// the solver objective.
pub fn optimize_opex(
    energy: &EnergyScenario,
    options: &OpexOptions,
) -> Result<EnergyPlan, OpexError> {
    let lp = build_energy_lp(energy, options.fixed_battery_kwh)?;
    let solution = lp.solve();
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(OpexError::Infeasible),
        LpStatus::Unbounded => {
            return Err(OpexError::Internal("scheduling objective is unbounded".to_string()))
        }
        LpStatus::IterationLimit => {
            return Err(OpexError::Internal("simplex iteration limit reached".to_string()))
        }
    }
    let slots = energy.slots;
    let series = |kind: Flow| -> Vec<f64> {
        (0..slots).map(|t| solution.x[var(kind, t, slots)]).collect()
    };
    let mut plan = EnergyPlan {
        grid_import: series(Flow::GridImport),
        solar_yield: series(Flow::SolarYield),
        battery_level: series(Flow::BatteryLevel),
        grid_to_load: series(Flow::GridToLoad),
        grid_to_battery: series(Flow::GridToBattery),
        solar_to_load: series(Flow::SolarToLoad),
        solar_to_battery: series(Flow::SolarToBattery),
        battery_to_load: series(Flow::BatteryToLoad),
        panel_area_m2: solution.x[panel_var(slots)],
        battery_capacity_kwh: solution.x[capacity_var(slots)],
        total_cost: 0.0,
    };
    plan.total_cost = bill(energy, &plan);
    Ok(plan)
}

/// Grid bill in slot order plus panel and battery capital.
fn bill(energy: &EnergyScenario, plan: &EnergyPlan) -> f64 {
    let mut total = 0.0;
    for t in 0..energy.slots {
        total += energy.grid_price[t] * plan.grid_import[t];
    }
    total
        + energy.panel_cost_per_m2 * plan.panel_area_m2
        + energy.battery_cost_per_kwh * plan.battery_capacity_kwh
}

/// Replaces the load in every slot whose traffic falls below `threshold`
/// with the idle floor (never raising it above the original load).
pub fn apply_power_saving(
    load: &[f64],
    traffic: &[f64],
    threshold: f64,
    idle_floor_kwh: f64,
) -> Vec<f64> {
    load.iter()
        .zip(traffic)
        .map(|(&l, &x)| if x < threshold { l.min(idle_floor_kwh) } else { l })
        .collect()
}

/// Re-checks every model constraint and the reported cost against the
/// scenario, one residual family per row of the report.
pub fn verify_plan(
    energy: &EnergyScenario,
    plan: &EnergyPlan,
    tolerance: f64,
) -> Result<ConstraintReport, OpexError> {
    energy.validate()?;
    let slots = energy.slots;
    let series: [&Vec<f64>; 8] = [
        &plan.grid_import,
        &plan.solar_yield,
        &plan.battery_level,
        &plan.grid_to_load,
        &plan.grid_to_battery,
        &plan.solar_to_load,
        &plan.solar_to_battery,
        &plan.battery_to_load,
    ];
    for s in series {
        if s.len() != slots {
            return Err(OpexError::DimensionMismatch { want: slots, got: s.len() });
        }
    }
    let rho = energy.charge_efficiency;
    let phi = energy.discharge_efficiency;
    let gamma = energy.panel_efficiency;

    let mut report = ConstraintReport::new(tolerance);
    let worst = |values: Box<dyn Iterator<Item = f64> + '_>| -> f64 {
        values.fold(0.0f64, |acc, v| acc.max(v))
    };

    let negatives = worst(Box::new(
        series
            .iter()
            .flat_map(|s| s.iter().map(|&v| -v))
            .chain([-plan.panel_area_m2, -plan.battery_capacity_kwh]),
    ));
    report.record("nonnegativity", negatives.max(0.0));
    report.record(
        "grid_split",
        worst(Box::new((0..slots).map(|t| {
            plan.grid_to_load[t] + plan.grid_to_battery[t] - plan.grid_import[t]
        }))),
    );
    report.record(
        "solar_split",
        worst(Box::new((0..slots).map(|t| {
            plan.solar_to_load[t] + plan.solar_to_battery[t] - plan.solar_yield[t]
        }))),
    );
    report.record(
        "solar_yield",
        worst(Box::new((0..slots).map(|t| {
            (plan.solar_yield[t] - gamma * energy.solar[t] * plan.panel_area_m2).abs()
        }))),
    );
    report.record(
        "battery_recursion",
        worst(Box::new((0..slots).map(|t| {
            let prev =
                if t == 0 { energy.initial_battery_kwh } else { plan.battery_level[t - 1] };
            plan.battery_level[t] + plan.battery_to_load[t]
                - rho * (plan.grid_to_battery[t] + plan.solar_to_battery[t])
                - prev
        }))),
    );
    report.record(
        "battery_capacity",
        worst(Box::new(
            (0..slots).map(|t| plan.battery_level[t] - plan.battery_capacity_kwh),
        )),
    );
    report.record(
        "load_coverage",
        worst(Box::new((0..slots).map(|t| {
            energy.load[t]
                - plan.grid_to_load[t]
                - plan.solar_to_load[t]
                - phi * plan.battery_to_load[t]
        }))),
    );
    if let Some(mask) = &energy.grid_available {
        report.record(
            "grid_mask",
            worst(Box::new(
                mask.iter()
                    .enumerate()
                    .filter(|(_, &available)| !available)
                    .map(|(t, _)| plan.grid_import[t]),
            )),
        );
    }
    let expected = bill(energy, plan);
    report.record(
        "cost_identity",
        (plan.total_cost - expected).abs() / expected.abs().max(1.0),
    );
    Ok(report)
}

/// Dispatch schedule as `t,e_g,e_p,e_b,e_g_l,e_g_b,e_p_l,e_p_b,e_b_l` CSV.
pub fn plan_to_dispatch_csv(plan: &EnergyPlan) -> String {
    let mut out = String::from("t,e_g,e_p,e_b,e_g_l,e_g_b,e_p_l,e_p_b,e_b_l\n");
    for t in 0..plan.slots() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            t,
            plan.grid_import[t],
            plan.solar_yield[t],
            plan.battery_level[t],
            plan.grid_to_load[t],
            plan.grid_to_battery[t],
            plan.solar_to_load[t],
            plan.solar_to_battery[t],
            plan.battery_to_load[t],
        ));
    }
    out
}

/// Sizing summary as `a_p,e_b_max,total_cost` CSV.
pub fn plan_to_summary_csv(plan: &EnergyPlan) -> String {
    format!(
        "a_p,e_b_max,total_cost\n{},{},{}\n",
        plan.panel_area_m2, plan.battery_capacity_kwh, plan.total_cost
    )
}

/// Rebuilds a plan from the two CSV files written by
/// [`plan_to_dispatch_csv`] and [`plan_to_summary_csv`].
pub fn parse_plan_csv(dispatch: &str, summary: &str) -> Result<EnergyPlan, OpexError> {
    let bad = |message: String| OpexError::MalformedCsv(message);
    let mut lines = dispatch.lines();
    if lines.next() != Some("t,e_g,e_p,e_b,e_g_l,e_g_b,e_p_l,e_p_b,e_b_l") {
        return Err(bad("bad dispatch header".to_string()));
    }
    let mut columns: [Vec<f64>; 8] = Default::default();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(bad(format!("bad dispatch row {line:?}")));
        }
        let t: usize = fields[0].parse().map_err(|e| bad(format!("bad slot index: {e}")))?;
        if t != row {
            return Err(bad(format!("slot {t} out of order")));
        }
        for (column, field) in columns.iter_mut().zip(&fields[1..]) {
            column.push(field.parse().map_err(|e| bad(format!("bad value: {e}")))?);
        }
    }
    let [e_g, e_p, e_b, e_g_l, e_g_b, e_p_l, e_p_b, e_b_l] = columns;

    let mut summary_lines = summary.lines();
    if summary_lines.next() != Some("a_p,e_b_max,total_cost") {
        return Err(bad("bad summary header".to_string()));
    }
    let row = summary_lines.next().ok_or_else(|| bad("missing summary row".to_string()))?;
    let values: Vec<f64> = row
        .split(',')
        .map(|f| f.parse().map_err(|e| bad(format!("bad summary value: {e}"))))
        .collect::<Result<_, _>>()?;
    let [a_p, e_b_max, total_cost] = values[..] else {
        return Err(bad(format!("bad summary row {row:?}")));
    };
    Ok(EnergyPlan {
        grid_import: e_g,
        solar_yield: e_p,
        battery_level: e_b,
        grid_to_load: e_g_l,
        grid_to_battery: e_g_b,
        solar_to_load: e_p_l,
        solar_to_battery: e_p_b,
        battery_to_load: e_b_l,
        panel_area_m2: a_p,
        battery_capacity_kwh: e_b_max,
        total_cost,
    })
}
