//! Scenario model: input data types, JSON parsing, validation, and derived
//! unit costs.
//!
//! A scenario document is a single JSON object with top-level keys
//! `villages`, `ubs_position`, `demographics`, `radio`, `costs` and `energy`.
//! `radio`, `costs` and `energy` are optional; missing radio/cost fields fall
//! back to the reference estimates in [`CostCatalog::reference`] and
//! [`RadioParams::default`]. Unknown keys are rejected in strict mode and
//! reported as warnings in lenient mode.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::Point;

/// Typical coverage radius span for a UHF base station [km].
pub const UHF_RADIUS_TYPICAL_KM: (f64, f64) = (10.0, 30.0);

/// Default Wi-Fi access point coverage bounds [km].
pub const WIFI_RADIUS_DEFAULT_BOUNDS_KM: (f64, f64) = (0.05, 0.45);

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

impl ScenarioError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation { path: path.into(), message: message.into() }
    }
}

/// A village demand point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Village {
    /// Unique identifier within the scenario.
    pub id: String,
    /// Location [km].
    pub position: Point,
    /// Resident users; weights the clustering step.
    pub population: u64,
}

/// Radio coverage parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioParams {
    /// UHF uplink reach of the gateway and of relay points [km].
    pub uhf_radius_km: f64,
    /// Admissible Wi-Fi access point radius interval [km].
    pub wifi_radius_bounds_km: (f64, f64),
    /// Informational Wi-Fi throughput [Mbps].
    pub wifi_throughput_mbps: f64,
    /// Informational UHF throughput [Mbps].
    pub uhf_throughput_mbps: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            uhf_radius_km: 15.0,
            wifi_radius_bounds_km: WIFI_RADIUS_DEFAULT_BOUNDS_KM,
            wifi_throughput_mbps: 600.0,
            uhf_throughput_mbps: 45.0,
        }
    }
}

/// Equipment price list [USD].
///
/// Missing fields default to the reference estimates; see
/// [`CostCatalog::reference`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostCatalog {
    pub uhf_transmitter: f64,
    pub platform_mast: f64,
    pub spectrum_db_manager: f64,
    pub wifi_transceiver: f64,
    pub uhf_receiver: f64,
    pub tvws_device: f64,
    /// Optical fiber cost [USD per km]; used only by the backhaul comparison.
    pub fiber_per_km: f64,
    /// Optional access-point price curve as `(radius_km, cost_usd)`
    /// breakpoints. When present it supersedes the composed access-point
    /// price: larger coverage radii come at a higher unit price.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ap_cost_curve: Option<Vec<(f64, f64)>>,
}

impl Default for CostCatalog {
    fn default() -> Self {
        Self::reference()
    }
}

impl CostCatalog {
    /// Reference price estimates [USD]: UHF transmitter 2500 (midpoint of the
    /// 2000-3000 street range), mast 800, spectrum database manager 1000,
    /// Wi-Fi transceiver 1000, UHF receiver 100, TVWS end device 650, fiber
    /// 15000 per km.
    pub fn reference() -> Self {
        Self {
            uhf_transmitter: 2500.0,
            platform_mast: 800.0,
            spectrum_db_manager: 1000.0,
            wifi_transceiver: 1000.0,
            uhf_receiver: 100.0,
            tvws_device: 650.0,
            fiber_per_km: 15_000.0,
            ap_cost_curve: None,
        }
    }

    pub fn item_cost(&self, item: CatalogItem) -> f64 {
        match item {
            CatalogItem::UhfTransmitter => self.uhf_transmitter,
            CatalogItem::PlatformMast => self.platform_mast,
            CatalogItem::SpectrumDbManager => self.spectrum_db_manager,
            CatalogItem::WifiTransceiver => self.wifi_transceiver,
            CatalogItem::UhfReceiver => self.uhf_receiver,
            CatalogItem::TvwsDevice => self.tvws_device,
        }
    }
}

/// One line item of the cost catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogItem {
    UhfTransmitter,
    PlatformMast,
    SpectrumDbManager,
    WifiTransceiver,
    UhfReceiver,
    TvwsDevice,
}

/// Which catalog items make up each node type.
///
/// The default composition charges the gateway with the UHF transmitter and
/// the spectrum database subscription but no mast (the gateway reuses the
/// host cell site), while a village access point pays for its Wi-Fi
/// transceiver, UHF receiver and its own mast. The TVWS end device is not
/// assigned to either node type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostComposition {
    pub ubs: Vec<CatalogItem>,
    pub access_point: Vec<CatalogItem>,
}

impl Default for CostComposition {
    fn default() -> Self {
        Self {
            ubs: vec![CatalogItem::UhfTransmitter, CatalogItem::SpectrumDbManager],
            access_point: vec![
                CatalogItem::WifiTransceiver,
                CatalogItem::UhfReceiver,
                CatalogItem::PlatformMast,
            ],
        }
    }
}

/// Piecewise-linear interpolation over `(x, y)` breakpoints, clamped at the
/// end breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Requires at least one breakpoint, strictly increasing `x` and
    /// nondecreasing `y`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ScenarioError> {
        if points.is_empty() {
            return Err(ScenarioError::invalid("ap_cost_curve", "at least one breakpoint required"));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("ap_cost_curve[{i}]"),
                    "breakpoint must be finite",
                ));
            }
            if x <= 0.0 {
                return Err(ScenarioError::invalid(
                    format!("ap_cost_curve[{i}]"),
                    "radius must be positive",
                ));
            }
            if y < 0.0 {
                return Err(ScenarioError::invalid(
                    format!("ap_cost_curve[{i}]"),
                    "cost must be nonnegative",
                ));
            }
        }
        for i in 1..points.len() {
            if points[i].0 <= points[i - 1].0 {
                return Err(ScenarioError::invalid("ap_cost_curve", "radii strictly increasing"));
            }
            if points[i].1 < points[i - 1].1 {
                return Err(ScenarioError::invalid("ap_cost_curve", "costs nondecreasing"));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Interpolated value at `x`, clamped to the end breakpoints.
    pub fn value(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let hi = pts.partition_point(|&(px, _)| px < x);
        let (x0, y0) = pts[hi - 1];
        let (x1, y1) = pts[hi];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Derived per-node-type costs [USD].
///
/// The relay cost is always the access-point cost plus the gateway cost,
/// at every evaluated radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCosts {
    /// Gateway UHF base station.
    pub ubs: f64,
    /// Exclusive access point at the widest admissible Wi-Fi radius.
    pub access_point: f64,
    /// Relay point, `access_point + ubs`.
    pub relay: f64,
    /// Radius-dependent access point price, when the catalog carries a curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub access_point_curve: Option<PiecewiseLinear>,
}

impl UnitCosts {
    /// Access point cost at radius `r` [USD].
    pub fn access_point_cost_at(&self, radius_km: f64) -> f64 {
        match &self.access_point_curve {
            Some(curve) => curve.value(radius_km),
            None => self.access_point,
        }
    }

    /// Relay cost at radius `r` [USD]; equals access point plus gateway.
    pub fn relay_cost_at(&self, radius_km: f64) -> f64 {
        self.access_point_cost_at(radius_km) + self.ubs
    }
}

/// Service population model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demographics {
    /// Total users served through the gateway.
    #[serde(rename = "N")]
    pub users: u64,
    /// User density [users per km²].
    #[serde(rename = "lambda")]
    pub density: f64,
}

impl Demographics {
    /// Effective service area [km²], users / density.
    pub fn area_km2(&self) -> f64 {
        self.users as f64 / self.density
    }
}

/// Energy supply and tariff data for the operating-cost scheduler.
///
/// All series are dense, slot-indexed, and expressed in per-slot energy
/// units: `solar` is the solar yield available to one m² of panel in a slot
/// [kWh/m²] (irradiance already multiplied by the slot duration), `load` is
/// the site consumption per slot [kWh], `grid_price` is the tariff
/// [USD/kWh].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyScenario {
    /// Number of time slots.
    pub slots: usize,
    /// Slot duration [h]; informational once series are per-slot energies.
    #[serde(default = "default_slot_hours")]
    pub slot_hours: f64,
    /// Grid tariff per slot [USD/kWh].
    pub grid_price: Vec<f64>,
    /// Solar yield per slot [kWh per m² of panel].
    pub solar: Vec<f64>,
    /// Site load per slot [kWh].
    pub load: Vec<f64>,
    /// Optional traffic profile [arbitrary units] driving the power-saving
    /// mask.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<Vec<f64>>,
    /// Load substituted in switched-off slots [kWh].
    #[serde(default)]
    pub idle_load_kwh: f64,
    /// Battery charging efficiency, in (0, 1].
    pub charge_efficiency: f64,
    /// Battery discharging efficiency, in (0, 1].
    pub discharge_efficiency: f64,
    /// Panel efficiency per unit area, in (0, 1].
    pub panel_efficiency: f64,
    /// Panel cost [USD per m²].
    pub panel_cost_per_m2: f64,
    /// Battery cost [USD per kWh of capacity]. No established street price
    /// exists for this figure; it must come from the scenario document.
    pub battery_cost_per_kwh: f64,
    /// Initial battery state [kWh].
    #[serde(default)]
    pub initial_battery_kwh: f64,
    /// Optional per-slot grid availability; `false` forbids any grid draw in
    /// that slot. Extension for modeling outages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_available: Option<Vec<bool>>,
}

impl EnergyScenario {
    /// Checks series lengths, efficiency ranges, and sign constraints; the
    /// same check [`load_scenario`] applies to an embedded energy section.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        validate_energy(self)
    }
}

fn default_slot_hours() -> f64 {
    1.0
}

/// A full planning scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub villages: Vec<Village>,
    /// Gateway location [km].
    pub ubs_position: Point,
    pub demographics: Demographics,
    #[serde(default)]
    pub radio: RadioParams,
    #[serde(default)]
    pub costs: CostCatalog,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyScenario>,
}

impl Scenario {
    /// Unit costs under the default composition, with the curve (if any)
    /// anchored at the scenario's upper Wi-Fi radius bound.
    pub fn unit_costs(&self) -> Result<UnitCosts, ScenarioError> {
        derive_unit_costs_with(
            &self.costs,
            &CostComposition::default(),
            self.radio.wifi_radius_bounds_km.1,
        )
    }

    /// Effective service area [km²].
    pub fn area_km2(&self) -> f64 {
        self.demographics.area_km2()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// How to treat unknown document keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyPolicy {
    /// Unknown keys are a validation error.
    Strict,
    /// Unknown keys are reported as warnings and otherwise ignored.
    Lenient,
}

/// A validated scenario plus non-fatal findings.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub warnings: Vec<String>,
}

/// Parses and validates a scenario document (strict key policy).
pub fn load_scenario(document: &str) -> Result<Loaded, ScenarioError> {
    load_scenario_with(document, KeyPolicy::Strict)
}

/// Parses and validates a scenario document under the given key policy.
pub fn load_scenario_with(document: &str, keys: KeyPolicy) -> Result<Loaded, ScenarioError> {
    let value: Value = serde_json::from_str(document)?;
    let mut warnings = Vec::new();
    check_document_keys(&value, keys, &mut warnings)?;
    let scenario: Scenario = serde_json::from_value(value)?;
    validate(&scenario, &mut warnings)?;
    Ok(Loaded { scenario, warnings })
}

/// Effective service area [km²] for `users` at `density` users per km².
pub fn effective_area(users: u64, density: f64) -> Result<f64, ScenarioError> {
    if users == 0 {
        return Err(ScenarioError::invalid("demographics.N", "N must be positive"));
    }
    if !(density > 0.0) || !density.is_finite() {
        return Err(ScenarioError::invalid("demographics.lambda", "lambda must be positive"));
    }
    Ok(users as f64 / density)
}

/// Derives unit costs from a catalog under the default composition, with a
/// curve (if any) anchored at the default upper Wi-Fi radius bound.
pub fn derive_unit_costs(catalog: &CostCatalog) -> Result<UnitCosts, ScenarioError> {
    derive_unit_costs_with(catalog, &CostComposition::default(), WIFI_RADIUS_DEFAULT_BOUNDS_KM.1)
}

/// Derives unit costs from a catalog: the gateway and access-point prices
/// are sums of their composed line items, and the relay price is their sum.
/// A price curve in the catalog supersedes the composed access-point scalar;
/// the scalar then becomes the curve value at `wifi_upper_km`.
pub fn derive_unit_costs_with(
    catalog: &CostCatalog,
    composition: &CostComposition,
    wifi_upper_km: f64,
) -> Result<UnitCosts, ScenarioError> {
    let sum = |items: &[CatalogItem]| items.iter().map(|&i| catalog.item_cost(i)).sum::<f64>();
    let ubs = sum(&composition.ubs);
    let curve = match &catalog.ap_cost_curve {
        Some(points) => Some(PiecewiseLinear::new(points.clone())?),
        None => None,
    };
    let access_point = match &curve {
        Some(curve) => curve.value(wifi_upper_km),
        None => sum(&composition.access_point),
    };
    Ok(UnitCosts { ubs, access_point, relay: access_point + ubs, access_point_curve: curve })
}

// --- key policy -----------------------------------------------------------

const TOP_KEYS: &[&str] = &["villages", "ubs_position", "demographics", "radio", "costs", "energy"];
const VILLAGE_KEYS: &[&str] = &["id", "position", "population"];
const DEMOGRAPHICS_KEYS: &[&str] = &["N", "lambda"];
const RADIO_KEYS: &[&str] =
    &["uhf_radius_km", "wifi_radius_bounds_km", "wifi_throughput_mbps", "uhf_throughput_mbps"];
const COSTS_KEYS: &[&str] = &[
    "uhf_transmitter",
    "platform_mast",
    "spectrum_db_manager",
    "wifi_transceiver",
    "uhf_receiver",
    "tvws_device",
    "fiber_per_km",
    "ap_cost_curve",
];
const ENERGY_KEYS: &[&str] = &[
    "slots",
    "slot_hours",
    "grid_price",
    "solar",
    "load",
    "traffic",
    "idle_load_kwh",
    "charge_efficiency",
    "discharge_efficiency",
    "panel_efficiency",
    "panel_cost_per_m2",
    "battery_cost_per_kwh",
    "initial_battery_kwh",
    "grid_available",
];

fn check_document_keys(
    value: &Value,
    policy: KeyPolicy,
    warnings: &mut Vec<String>,
) -> Result<(), ScenarioError> {
    check_keys(value, "", TOP_KEYS, policy, warnings)?;
    if let Some(villages) = value.get("villages").and_then(Value::as_array) {
        for (i, v) in villages.iter().enumerate() {
            check_keys(v, &format!("villages[{i}]."), VILLAGE_KEYS, policy, warnings)?;
        }
    }
    for (section, keys) in [
        ("demographics", DEMOGRAPHICS_KEYS),
        ("radio", RADIO_KEYS),
        ("costs", COSTS_KEYS),
        ("energy", ENERGY_KEYS),
    ] {
        if let Some(obj) = value.get(section) {
            check_keys(obj, &format!("{section}."), keys, policy, warnings)?;
        }
    }
    Ok(())
}

fn check_keys(
    value: &Value,
    prefix: &str,
    allowed: &[&str],
    policy: KeyPolicy,
    warnings: &mut Vec<String>,
) -> Result<(), ScenarioError> {
    let Some(map) = value.as_object() else { return Ok(()) };
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            match policy {
                KeyPolicy::Strict => {
                    return Err(ScenarioError::invalid(format!("{prefix}{key}"), "unknown key"));
                }
                KeyPolicy::Lenient => warnings.push(format!("{prefix}{key}: unknown key ignored")),
            }
        }
    }
    Ok(())
}

// --- validation -----------------------------------------------------------

fn validate(scenario: &Scenario, warnings: &mut Vec<String>) -> Result<(), ScenarioError> {
    if scenario.villages.is_empty() {
        return Err(ScenarioError::invalid("villages", "at least one village required"));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (i, village) in scenario.villages.iter().enumerate() {
        if !seen.insert(village.id.as_str()) {
            return Err(ScenarioError::invalid(
                format!("villages[{i}].id"),
                format!("duplicate village id {:?}", village.id),
            ));
        }
        if !village.position.is_finite() {
            return Err(ScenarioError::invalid(
                format!("villages[{i}].position"),
                "coordinates must be finite",
            ));
        }
    }
    if !scenario.ubs_position.is_finite() {
        return Err(ScenarioError::invalid("ubs_position", "coordinates must be finite"));
    }

    if scenario.demographics.users == 0 {
        return Err(ScenarioError::invalid("demographics.N", "N must be positive"));
    }
    let density = scenario.demographics.density;
    if !(density > 0.0) || !density.is_finite() {
        return Err(ScenarioError::invalid("demographics.lambda", "lambda must be positive"));
    }

    validate_radio(&scenario.radio, warnings)?;
    validate_costs(&scenario.costs)?;
    if let Some(energy) = &scenario.energy {
        validate_energy(energy)?;
    }
    Ok(())
}

fn validate_radio(radio: &RadioParams, warnings: &mut Vec<String>) -> Result<(), ScenarioError> {
    if !(radio.uhf_radius_km > 0.0) || !radio.uhf_radius_km.is_finite() {
        return Err(ScenarioError::invalid("radio.uhf_radius_km", "must be positive"));
    }
    let (lo, hi) = radio.wifi_radius_bounds_km;
    if !(lo > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(ScenarioError::invalid(
            "radio.wifi_radius_bounds_km",
            "bounds must satisfy 0 < lower <= upper",
        ));
    }
    let (typ_lo, typ_hi) = UHF_RADIUS_TYPICAL_KM;
    if radio.uhf_radius_km < typ_lo || radio.uhf_radius_km > typ_hi {
        warnings.push(format!(
            "radio.uhf_radius_km: {} outside the typical UHF range [{}, {}] km",
            radio.uhf_radius_km, typ_lo, typ_hi
        ));
    }
    Ok(())
}

fn validate_costs(costs: &CostCatalog) -> Result<(), ScenarioError> {
    let items = [
        ("costs.uhf_transmitter", costs.uhf_transmitter),
        ("costs.platform_mast", costs.platform_mast),
        ("costs.spectrum_db_manager", costs.spectrum_db_manager),
        ("costs.wifi_transceiver", costs.wifi_transceiver),
        ("costs.uhf_receiver", costs.uhf_receiver),
        ("costs.tvws_device", costs.tvws_device),
        ("costs.fiber_per_km", costs.fiber_per_km),
    ];
    for (path, value) in items {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(ScenarioError::invalid(path, "cost must be nonnegative and finite"));
        }
    }
    if let Some(points) = &costs.ap_cost_curve {
        PiecewiseLinear::new(points.clone()).map_err(|e| match e {
            ScenarioError::Validation { path, message } => {
                ScenarioError::Validation { path: format!("costs.{path}"), message }
            }
            other => other,
        })?;
    }
    Ok(())
}

fn validate_energy(energy: &EnergyScenario) -> Result<(), ScenarioError> {
    if energy.slots == 0 {
        return Err(ScenarioError::invalid("energy.slots", "must be positive"));
    }
    if !(energy.slot_hours > 0.0) || !energy.slot_hours.is_finite() {
        return Err(ScenarioError::invalid("energy.slot_hours", "must be positive"));
    }
    let series: [(&str, &[f64]); 3] = [
        ("energy.grid_price", &energy.grid_price),
        ("energy.solar", &energy.solar),
        ("energy.load", &energy.load),
    ];
    for (path, values) in series {
        check_series(path, values, energy.slots)?;
    }
    if let Some(traffic) = &energy.traffic {
        check_series("energy.traffic", traffic, energy.slots)?;
    }
    if let Some(mask) = &energy.grid_available {
        if mask.len() != energy.slots {
            return Err(ScenarioError::invalid(
                "energy.grid_available",
                format!("expected {} entries, got {}", energy.slots, mask.len()),
            ));
        }
    }
    for (path, value) in [
        ("energy.charge_efficiency", energy.charge_efficiency),
        ("energy.discharge_efficiency", energy.discharge_efficiency),
        ("energy.panel_efficiency", energy.panel_efficiency),
    ] {
        if !(value > 0.0 && value <= 1.0) {
            return Err(ScenarioError::invalid(path, "must lie in (0, 1]"));
        }
    }
    for (path, value) in [
        ("energy.panel_cost_per_m2", energy.panel_cost_per_m2),
        ("energy.battery_cost_per_kwh", energy.battery_cost_per_kwh),
        ("energy.initial_battery_kwh", energy.initial_battery_kwh),
        ("energy.idle_load_kwh", energy.idle_load_kwh),
    ] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(ScenarioError::invalid(path, "must be nonnegative and finite"));
        }
    }
    Ok(())
}

fn check_series(path: &str, values: &[f64], slots: usize) -> Result<(), ScenarioError> {
    if values.len() != slots {
        return Err(ScenarioError::invalid(
            path,
            format!("expected {} entries, got {}", slots, values.len()),
        ));
    }
    for (i, v) in values.iter().enumerate() {
        if !(*v >= 0.0) || !v.is_finite() {
            return Err(ScenarioError::invalid(
                format!("{path}[{i}]"),
                "entries must be nonnegative and finite",
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minimal_doc() -> String {
        r#"{
            "villages": [{"id": "a", "position": [0.0, 0.0], "population": 40}],
            "ubs_position": [0.0, 0.0],
            "demographics": {"N": 100, "lambda": 10.0}
        }"#
        .to_string()
    }

    #[test]
    fn minimal_document_loads_with_defaults() {
        let loaded = load_scenario(&minimal_doc()).unwrap();
        let s = &loaded.scenario;
        assert_eq!(s.area_km2(), 10.0);
        assert_eq!(s.radio.wifi_radius_bounds_km, (0.05, 0.45));
        assert_eq!(s.costs.uhf_transmitter, 2500.0);
        assert!(s.energy.is_none());
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn zero_lambda_is_rejected() {
        let doc = minimal_doc().replace("\"lambda\": 10.0", "\"lambda\": 0.0");
        let err = load_scenario(&doc).unwrap_err();
        assert!(err.to_string().contains("lambda must be positive"), "{err}");
    }

    #[test]
    fn decreasing_curve_radii_are_rejected() {
        let doc = minimal_doc().replace(
            "\"demographics\"",
            "\"costs\": {\"ap_cost_curve\": [[0.2, 100.0], [0.1, 200.0]]}, \"demographics\"",
        );
        let err = load_scenario(&doc).unwrap_err();
        assert!(err.to_string().contains("radii strictly increasing"), "{err}");
    }

    #[test]
    fn unknown_key_strict_vs_lenient() {
        let doc = minimal_doc().replace("\"ubs_position\"", "\"extra\": 1, \"ubs_position\"");
        let err = load_scenario(&doc).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
        let loaded = load_scenario_with(&doc, KeyPolicy::Lenient).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn unit_costs_from_reference_style_catalog() {
        let catalog = CostCatalog {
            uhf_transmitter: 2500.0,
            spectrum_db_manager: 1000.0,
            wifi_transceiver: 1000.0,
            uhf_receiver: 100.0,
            platform_mast: 800.0,
            ..CostCatalog::reference()
        };
        let costs = derive_unit_costs(&catalog).unwrap();
        assert_eq!(costs.ubs, 3500.0);
        assert_eq!(costs.access_point, 1900.0);
        assert_eq!(costs.relay, 5400.0);
    }

    #[test]
    fn unit_costs_zero_catalog() {
        let catalog = CostCatalog {
            uhf_transmitter: 0.0,
            platform_mast: 0.0,
            spectrum_db_manager: 0.0,
            wifi_transceiver: 0.0,
            uhf_receiver: 0.0,
            tvws_device: 0.0,
            fiber_per_km: 0.0,
            ap_cost_curve: None,
        };
        let costs = derive_unit_costs(&catalog).unwrap();
        assert_eq!((costs.ubs, costs.access_point, costs.relay), (0.0, 0.0, 0.0));
    }

    #[test]
    fn curve_interpolates_and_anchors_scalar_at_upper_bound() {
        let catalog = CostCatalog {
            ap_cost_curve: Some(vec![(0.05, 500.0), (0.45, 1900.0)]),
            ..CostCatalog::reference()
        };
        let costs = derive_unit_costs(&catalog).unwrap();
        assert!((costs.access_point_cost_at(0.25) - 1200.0).abs() < 1e-12);
        assert_eq!(costs.access_point, 1900.0);
        // clamped outside the breakpoints
        assert_eq!(costs.access_point_cost_at(0.01), 500.0);
        assert_eq!(costs.access_point_cost_at(1.0), 1900.0);
    }

    #[test]
    fn effective_area_examples() {
        assert_eq!(effective_area(1000, 10.0).unwrap(), 100.0);
        assert_eq!(effective_area(1, 1.0).unwrap(), 1.0);
        assert_eq!(effective_area(5000, 2.5).unwrap(), 2000.0);
        assert!(effective_area(0, 1.0).is_err());
        assert!(effective_area(10, 0.0).is_err());
    }

    #[test]
    fn scenario_roundtrip_is_identical() {
        let loaded = load_scenario(&minimal_doc()).unwrap();
        let json = loaded.scenario.to_json_pretty();
        let reloaded = load_scenario(&json).unwrap();
        assert_eq!(loaded.scenario, reloaded.scenario);
    }

    proptest! {
        #[test]
        fn relay_is_exactly_access_point_plus_ubs(
            tx in 0.0f64..10_000.0,
            mast in 0.0f64..5_000.0,
            sdm in 0.0f64..5_000.0,
            wifi in 0.0f64..5_000.0,
            rx in 0.0f64..1_000.0,
        ) {
            let catalog = CostCatalog {
                uhf_transmitter: tx,
                platform_mast: mast,
                spectrum_db_manager: sdm,
                wifi_transceiver: wifi,
                uhf_receiver: rx,
                ..CostCatalog::reference()
            };
            let costs = derive_unit_costs(&catalog).unwrap();
            prop_assert_eq!(costs.relay, costs.access_point + costs.ubs);
        }

        #[test]
        fn effective_area_times_density_recovers_users(
            users in 1u64..1_000_000,
            density in 1e-3f64..1e4,
        ) {
            let area = effective_area(users, density).unwrap();
            let back = area * density;
            prop_assert!((back - users as f64).abs() <= 1e-12 * users as f64);
        }
    }
}
