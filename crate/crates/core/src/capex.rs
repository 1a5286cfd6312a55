//! Capital-cost model and optimizer: site-count arithmetic, infrastructure
//! cost per user, and the mixed-integer minimization over relay count and
//! Wi-Fi radius, plus the relay sweep and backhaul comparison series.
//!
//! The per-user objective is `(c_A(R) * A / (pi R^2) + c_U (n_R + 1)) / N`.
//! It is affine and strictly increasing in `n_R` and, for constant `c_A`,
//! strictly decreasing in `R`; the optimizer exploits both facts, while the
//! brute-force twin scans the whole grid literally so the two stay
//! independent.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::report::ConstraintReport;
use crate::scenario::{CostCatalog, Scenario, ScenarioError, UnitCosts};
use crate::topology::{self, TopologyError};

/// Quotients this close (relative) to an integer count as exact, so a disk
/// count of 10.000000000001 does not round up to 11.
pub const COUNT_SNAP_RELATIVE: f64 = 1e-9;

/// Golden-section interval tolerance for the radius search [km].
pub const RADIUS_SEARCH_TOLERANCE_KM: f64 = 1e-6;

/// Smallest accepted brute-force radius grid.
pub const MIN_GRID_SAMPLES: usize = 1_000;

#[derive(Debug, Error)]
pub enum CapexError {
    #[error("radius must be positive")]
    NonpositiveRadius,
    #[error("user count must be positive")]
    NonpositiveUsers,
    #[error("baseline cost must be positive")]
    NonpositiveBaseline,
    #[error("radius bounds must satisfy 0 < lower <= upper")]
    InvalidRadiusBounds,
    #[error("service area {area} km2 disagrees with users/density {quotient} km2")]
    InconsistentArea { area: f64, quotient: f64 },
    #[error("brute-force grid needs at least {MIN_GRID_SAMPLES} samples, got {0}")]
    GridTooCoarse(usize),
    #[error("malformed series: {0}")]
    MalformedCsv(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Inputs to the capital-cost optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct CapexInputs {
    /// Service area [km²]; must equal users/density.
    pub area_km2: f64,
    /// Users served through the gateway.
    pub users: u64,
    /// User density [users per km²].
    pub density: f64,
    /// Gateway, access-point, and relay prices.
    pub unit_costs: UnitCosts,
    /// Admissible Wi-Fi radius interval [km].
    pub radius_bounds_km: (f64, f64),
    /// Topologically forced relay count (lower bound on `n_R`).
    pub min_relays: u64,
}

impl CapexInputs {
    /// Builds inputs from a scenario; the relay lower bound comes from the
    /// topology at the upper Wi-Fi radius bound.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, CapexError> {
        let radius_bounds_km = scenario.radio.wifi_radius_bounds_km;
        let min_relays = topology::min_relay_count(scenario, radius_bounds_km.1)?;
        Ok(Self {
            area_km2: scenario.area_km2(),
            users: scenario.demographics.users,
            density: scenario.demographics.density,
            unit_costs: scenario.unit_costs()?,
            radius_bounds_km,
            min_relays,
        })
    }

    pub fn validate(&self) -> Result<(), CapexError> {
        if self.users == 0 {
            return Err(CapexError::NonpositiveUsers);
        }
        let (lo, hi) = self.radius_bounds_km;
        if !(lo > 0.0) || !(lo <= hi) || !hi.is_finite() {
            return Err(CapexError::InvalidRadiusBounds);
        }
        if !(self.density > 0.0) || !self.area_km2.is_finite() {
            return Err(CapexError::InconsistentArea {
                area: self.area_km2,
                quotient: f64::NAN,
            });
        }
        let quotient = self.users as f64 / self.density;
        if (self.area_km2 - quotient).abs() > 1e-9 * self.area_km2.abs().max(quotient.abs()) {
            return Err(CapexError::InconsistentArea { area: self.area_km2, quotient });
        }
        Ok(())
    }

    fn access_point_cost_at(&self, radius_km: f64) -> f64 {
        self.unit_costs.access_point_cost_at(radius_km)
    }
}

/// Outcome of the capital-cost search. Infeasible outcomes carry zeroed
/// counts and costs with `feasible = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapexResult {
    #[serde(rename = "n_A")]
    pub n_a: u64,
    #[serde(rename = "n_R")]
    pub n_r: u64,
    /// Chosen Wi-Fi radius [km].
    pub r_star_km: f64,
    /// Cost with integer site counts [USD].
    pub infra_cost_exact: f64,
    /// Cost with the fractional disk count `A/(pi R^2)` [USD].
    pub infra_cost_analytic: f64,
    /// `infra_cost_analytic / users` [USD].
    pub cost_per_user: f64,
    pub feasible: bool,
}

impl CapexResult {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Disks of radius `radius_km` needed to tile `area_km2`: the ceiling of
/// the quotient, except that quotients within [`COUNT_SNAP_RELATIVE`] of an
/// integer snap to it first (the ceiling of an integer is itself).
pub fn total_vcc_count(area_km2: f64, radius_km: f64) -> Result<u64, CapexError> {
    if !(radius_km > 0.0) {
        return Err(CapexError::NonpositiveRadius);
    }
    if area_km2 == 0.0 {
        return Ok(0);
    }
    let quotient = area_km2 / (PI * radius_km * radius_km);
    let nearest = quotient.round();
    let snapped = if (quotient - nearest).abs() <= COUNT_SNAP_RELATIVE * quotient.abs().max(1.0) {
        nearest
    } else {
        quotient.ceil()
    };
    Ok(snapped as u64)
}

/// Total infrastructure cost `c_A (n_A + n_R) + c_U (n_R + 1)` [USD]; the
/// relay form `c_U + c_A n_A + (c_A + c_U) n_R` is the same expression.
pub fn infra_cost(c_a: f64, c_u: f64, n_a: u64, n_r: u64) -> f64 {
    c_a * (n_a + n_r) as f64 + c_u * (n_r + 1) as f64
}

/// Per-user cost with the fractional disk count:
/// `(c_A A / (pi R^2) + c_U (n_R + 1)) / N` [USD]. Differs from the exact
/// per-user cost by at most `c_A / N` (the ceiling gap).
pub fn cost_per_user_analytic(
    c_a: f64,
    c_u: f64,
    area_km2: f64,
    radius_km: f64,
    n_r: u64,
    users: u64,
) -> Result<f64, CapexError> {
    if !(radius_km > 0.0) {
        return Err(CapexError::NonpositiveRadius);
    }
    if users == 0 {
        return Err(CapexError::NonpositiveUsers);
    }
    Ok(analytic_infra(c_a, c_u, area_km2, radius_km, n_r) / users as f64)
}

fn analytic_infra(c_a: f64, c_u: f64, area_km2: f64, radius_km: f64, n_r: u64) -> f64 {
    c_a * area_km2 / (PI * radius_km * radius_km) + c_u * (n_r as f64 + 1.0)
}

/// Full result for one `(R, n_R)` candidate; `total_sites` is the disk
/// count the candidate's interval prescribes.
fn evaluate_candidate(inputs: &CapexInputs, radius_km: f64, n_r: u64, total_sites: u64) -> CapexResult {
    let c_a = inputs.access_point_cost_at(radius_km);
    let c_u = inputs.unit_costs.ubs;
    let n_a = n_r.max(total_sites.saturating_sub(n_r));
    let infra_cost_analytic = analytic_infra(c_a, c_u, inputs.area_km2, radius_km, n_r);
    CapexResult {
        n_a,
        n_r,
        r_star_km: radius_km,
        infra_cost_exact: infra_cost(c_a, c_u, n_a, n_r),
        infra_cost_analytic,
        cost_per_user: infra_cost_analytic / inputs.users as f64,
        feasible: true,
    }
}

/// Shared candidate order: cheapest per-user cost, then fewest relays, then
/// the largest radius, then the fewest access points.
fn candidate_order(a: &CapexResult, b: &CapexResult) -> Ordering {
    a.cost_per_user
        .total_cmp(&b.cost_per_user)
        .then(a.n_r.cmp(&b.n_r))
        .then(b.r_star_km.total_cmp(&a.r_star_km))
        .then(a.n_a.cmp(&b.n_a))
}

fn option_order(a: &Option<CapexResult>, b: &Option<CapexResult>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => candidate_order(a, b),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn infeasible_result(inputs: &CapexInputs) -> CapexResult {
    CapexResult {
        n_a: 0,
        n_r: 0,
        r_star_km: inputs.radius_bounds_km.1,
        infra_cost_exact: 0.0,
        infra_cost_analytic: 0.0,
        cost_per_user: 0.0,
        feasible: false,
    }
}

/// Minimizes per-user cost over `R` in bounds and `n_R >= min_relays`, with
/// `n_A = max(n_R, m - n_R)` for the interval's disk count `m`.
///
/// The radius axis splits at the breakpoints `R_k = sqrt(A / (pi k))` into
/// intervals of constant disk count. Relay admissibility within an interval
/// is `n_R <= floor(m / 2)`; since the objective strictly increases in
/// `n_R` (slope `c_U / N`, with the smallest-`n_R` tie-break covering
/// `c_U = 0`), only `n_R = min_relays` can win. With constant `c_A` the
/// objective strictly decreases in `R`, so each interval contributes its
/// right endpoint; with a price curve each interval is split again at the
/// curve breakpoints and searched by golden section plus explicit endpoint
/// evaluations (on any linear price piece the interior stationary point is
/// a maximum, so minima sit on segment ends).
pub fn optimize_capex(inputs: &CapexInputs) -> Result<CapexResult, CapexError> {
    inputs.validate()?;
    let (r_min, r_max) = inputs.radius_bounds_km;
    let k_lo = total_vcc_count(inputs.area_km2, r_max)?;
    let k_hi = total_vcc_count(inputs.area_km2, r_min)?;
    if inputs.min_relays * 2 > k_hi {
        return Ok(infeasible_result(inputs));
    }
    let n_r = inputs.min_relays;
    let breakpoint = |k: u64| (inputs.area_km2 / (PI * k as f64)).sqrt();

    let intervals = (k_hi - k_lo + 1) as usize;
    let best = exec::min_by_index(
        intervals,
        |offset| {
            let k = k_lo + offset as u64;
            if n_r * 2 > k {
                return None;
            }
            let hi = if k == k_lo { r_max } else { breakpoint(k - 1).min(r_max) };
            let lo = if k == k_hi { r_min } else { breakpoint(k).max(r_min) }.min(hi);
            Some(best_in_interval(inputs, lo, hi, n_r, k))
        },
        option_order,
    )
    .flatten();
    Ok(best.unwrap_or_else(|| infeasible_result(inputs)))
}

fn best_in_interval(
    inputs: &CapexInputs,
    lo: f64,
    hi: f64,
    n_r: u64,
    total_sites: u64,
) -> CapexResult {
    let Some(curve) = &inputs.unit_costs.access_point_curve else {
        return evaluate_candidate(inputs, hi, n_r, total_sites);
    };
    let mut cuts = vec![lo];
    cuts.extend(
        curve.points().iter().map(|&(r, _)| r).filter(|&r| r > lo && r < hi),
    );
    cuts.push(hi);

    let objective = |r: f64| {
        analytic_infra(
            inputs.access_point_cost_at(r),
            inputs.unit_costs.ubs,
            inputs.area_km2,
            r,
            n_r,
        )
    };
    let mut best: Option<CapexResult> = None;
    let mut consider = |r: f64| {
        let candidate = evaluate_candidate(inputs, r, n_r, total_sites);
        let replace =
            best.as_ref().map_or(true, |b| candidate_order(&candidate, b) == Ordering::Less);
        if replace {
            best = Some(candidate);
        }
    };
    for pair in cuts.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        consider(u);
        consider(v);
        if v - u > RADIUS_SEARCH_TOLERANCE_KM {
            consider(golden_section_argmin(u, v, RADIUS_SEARCH_TOLERANCE_KM, objective));
        }
    }
    best.expect("interval holds at least one candidate")
}

fn golden_section_argmin(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Exhaustive scan over an evenly spaced radius grid (endpoints included)
/// and, at each radius, every admissible relay count; the independent
/// cross-check for [`optimize_capex`], sharing only the tie-break order.
pub fn brute_force_capex(inputs: &CapexInputs, samples: usize) -> Result<CapexResult, CapexError> {
    brute_force_impl(inputs, samples, true)
}

/// Sequential twin of [`brute_force_capex`]; always single-threaded so the
/// two paths can be benchmarked against each other in one build.
pub fn brute_force_capex_serial(
    inputs: &CapexInputs,
    samples: usize,
) -> Result<CapexResult, CapexError> {
    brute_force_impl(inputs, samples, false)
}

fn brute_force_impl(
    inputs: &CapexInputs,
    samples: usize,
    parallel: bool,
) -> Result<CapexResult, CapexError> {
    inputs.validate()?;
    if samples < MIN_GRID_SAMPLES {
        return Err(CapexError::GridTooCoarse(samples));
    }
    let (r_min, r_max) = inputs.radius_bounds_km;
    let step = (r_max - r_min) / (samples - 1) as f64;
    let scan_radius = |i: usize| -> Option<CapexResult> {
        let radius = if i + 1 == samples { r_max } else { r_min + step * i as f64 };
        let total = total_vcc_count(inputs.area_km2, radius).expect("radius is positive");
        let mut best: Option<CapexResult> = None;
        let mut n_r = inputs.min_relays;
        while n_r * 2 <= total {
            let candidate = evaluate_candidate(inputs, radius, n_r, total);
            let replace =
                best.as_ref().map_or(true, |b| candidate_order(&candidate, b) == Ordering::Less);
            if replace {
                best = Some(candidate);
            }
            n_r += 1;
        }
        best
    };
    let best = if parallel {
        exec::min_by_index(samples, scan_radius, option_order)
    } else {
        exec::min_by_index_serial(samples, scan_radius, option_order)
    }
    .flatten();
    Ok(best.unwrap_or_else(|| infeasible_result(inputs)))
}

/// Per-user cost for each relay count in `n_r_range` at a fixed radius;
/// affine in `n_R` with slope `c_U / N`.
pub fn relay_sweep(
    inputs: &CapexInputs,
    n_r_range: std::ops::RangeInclusive<u64>,
    radius_km: f64,
) -> Result<Vec<(u64, f64)>, CapexError> {
    inputs.validate()?;
    if !(radius_km > 0.0) {
        return Err(CapexError::NonpositiveRadius);
    }
    let c_a = inputs.access_point_cost_at(radius_km);
    let c_u = inputs.unit_costs.ubs;
    let (start, end) = (*n_r_range.start(), *n_r_range.end());
    if start > end {
        return Ok(Vec::new());
    }
    let count = (end - start + 1) as usize;
    Ok(exec::map_indices(count, |i| {
        let n_r = start + i as u64;
        let cost = analytic_infra(c_a, c_u, inputs.area_km2, radius_km, n_r)
            / inputs.users as f64;
        (n_r, cost)
    }))
}

/// One backhaul alternative in the comparison series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackhaulOption {
    pub label: String,
    /// Deployment cost [USD].
    pub cost: f64,
    /// Cost relative to the cellular-backhaul baseline.
    pub ratio: f64,
}

/// Compares the cellular-backhaul baseline against fiber runs of the given
/// lengths: each fiber variant costs `baseline + fiber_per_km * d`, and
/// ratios are relative to the baseline.
pub fn backhaul_comparison(
    catalog: &CostCatalog,
    baseline: f64,
    fiber_lengths_km: &[f64],
) -> Result<Vec<BackhaulOption>, CapexError> {
    if !(baseline > 0.0) || !baseline.is_finite() {
        return Err(CapexError::NonpositiveBaseline);
    }
    let mut options = vec![BackhaulOption {
        label: "5g_backhaul".to_string(),
        cost: baseline,
        ratio: 1.0,
    }];
    for &d in fiber_lengths_km {
        let cost = baseline + catalog.fiber_per_km * d;
        options.push(BackhaulOption {
            label: format!("fiber_{d}km"),
            cost,
            ratio: cost / baseline,
        });
    }
    Ok(options)
}

/// Re-derives every reported figure and bound of a feasible result.
pub fn verify_capex_result(
    inputs: &CapexInputs,
    result: &CapexResult,
    tolerance: f64,
) -> ConstraintReport {
    let mut report = ConstraintReport::new(tolerance);
    if !result.feasible {
        report.record("infeasible_flag_only", 0.0);
        return report;
    }
    let (r_min, r_max) = inputs.radius_bounds_km;
    let r = result.r_star_km;
    let c_a = inputs.access_point_cost_at(r);
    let c_u = inputs.unit_costs.ubs;
    let quotient = inputs.area_km2 / (PI * r * r);

    report.record("relay_lower_bound", inputs.min_relays.saturating_sub(result.n_r) as f64);
    report.record("access_relay_order", result.n_r.saturating_sub(result.n_a) as f64);
    report.record("coverage", (quotient - (result.n_a + result.n_r) as f64).max(0.0));
    report.record("radius_bounds", (r_min - r).max(r - r_max).max(0.0));

    let analytic = analytic_infra(c_a, c_u, inputs.area_km2, r, result.n_r);
    let exact = infra_cost(c_a, c_u, result.n_a, result.n_r);
    let scale = analytic.abs().max(1.0);
    report.record("analytic_recompute", (result.infra_cost_analytic - analytic).abs() / scale);
    report.record("exact_recompute", (result.infra_cost_exact - exact).abs() / scale);
    report.record(
        "cost_identity",
        (result.cost_per_user * inputs.users as f64 - result.infra_cost_analytic).abs() / scale,
    );
    let gap = result.infra_cost_exact - result.infra_cost_analytic;
    report.record("ceiling_gap", ((-gap).max(gap - c_a) / scale).max(0.0));
    report
}

/// Relay sweep as `n_R,cost_per_user` CSV.
pub fn sweep_to_csv(series: &[(u64, f64)]) -> String {
    let mut out = String::from("n_R,cost_per_user\n");
    for (n_r, cost) in series {
        out.push_str(&format!("{n_r},{cost}\n"));
    }
    out
}

/// Parses a sweep written by [`sweep_to_csv`].
pub fn parse_sweep_csv(text: &str) -> Result<Vec<(u64, f64)>, CapexError> {
    parse_rows(text, "n_R,cost_per_user", |fields, line| {
        let [n_r, cost] = fields else {
            return Err(CapexError::MalformedCsv(format!("bad row {line:?}")));
        };
        Ok((
            n_r.parse().map_err(|e| CapexError::MalformedCsv(format!("bad count: {e}")))?,
            cost.parse().map_err(|e| CapexError::MalformedCsv(format!("bad cost: {e}")))?,
        ))
    })
}

/// Backhaul comparison as `label,cost,ratio` CSV.
pub fn backhaul_to_csv(options: &[BackhaulOption]) -> String {
    let mut out = String::from("label,cost,ratio\n");
    for option in options {
        out.push_str(&format!("{},{},{}\n", option.label, option.cost, option.ratio));
    }
    out
}

/// Parses a comparison written by [`backhaul_to_csv`].
pub fn parse_backhaul_csv(text: &str) -> Result<Vec<BackhaulOption>, CapexError> {
    parse_rows(text, "label,cost,ratio", |fields, line| {
        let [label, cost, ratio] = fields else {
            return Err(CapexError::MalformedCsv(format!("bad row {line:?}")));
        };
        Ok(BackhaulOption {
            label: label.to_string(),
            cost: cost.parse().map_err(|e| CapexError::MalformedCsv(format!("bad cost: {e}")))?,
            ratio: ratio.parse().map_err(|e| CapexError::MalformedCsv(format!("bad ratio: {e}")))?,
        })
    })
}

fn parse_rows<T>(
    text: &str,
    header: &str,
    parse: impl Fn(&[&str], &str) -> Result<T, CapexError>,
) -> Result<Vec<T>, CapexError> {
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(CapexError::MalformedCsv(format!("expected header {header:?}")));
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            parse(&fields, line)
        })
        .collect()
}
