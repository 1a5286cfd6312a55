//! End-to-end behavior of the `ruralplan` binary: exit codes, pinned
//! summary lines, warnings, key policy, and byte-reproducible outputs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ruralplan"))
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], envs: &[(&str, &str)]) -> Run {
    let mut cmd = bin();
    cmd.args(args);
    cmd.env_remove("RURALPLAN_LENIENT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let output = cmd.output().expect("binary runs");
    Run {
        code: output.status.code().expect("no signal"),
        stdout: String::from_utf8(output.stdout).unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
    }
}

fn repo_scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .display()
        .to_string()
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const ARBITRAGE: &str = r#"{
  "villages": [ { "id": "v0", "position": [0.5, 0.5], "population": 100 } ],
  "ubs_position": [0.0, 0.0],
  "demographics": { "N": 100, "lambda": 10.0 },
  "energy": {
    "slots": 2,
    "grid_price": [5.0, 100.0],
    "solar": [0.0, 0.0],
    "load": [0.0, 1.0],
    "charge_efficiency": 1.0,
    "discharge_efficiency": 1.0,
    "panel_efficiency": 0.18,
    "panel_cost_per_m2": 1000000.0,
    "battery_cost_per_kwh": 0.5,
    "initial_battery_kwh": 0.0
  }
}"#;

#[test]
fn plan_summary_matches_the_reference_deployment() {
    let result = run(&["plan", "--scenario", &repo_scenario("six_village.json")]);
    assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    assert_eq!(result.stdout.trim(), "n_A=3 n_R=1 uncovered=0");
}

#[test]
fn missing_scenario_file_fails_validation() {
    let result = run(&["plan", "--scenario", "/nonexistent/nowhere.json"]);
    assert_eq!(result.code, 1);
    assert!(result.stderr.contains("cannot read"));
}

#[test]
fn unreachable_village_is_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "far.json",
        r#"{
          "villages": [
            { "id": "near", "position": [1.0, 0.0], "population": 100 },
            { "id": "far", "position": [200.0, 0.0], "population": 50 }
          ],
          "ubs_position": [0.0, 0.0],
          "demographics": { "N": 150, "lambda": 1.5 }
        }"#,
    );
    let result = run(&["plan", "--scenario", &scenario]);
    assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    assert_eq!(result.stdout.trim(), "n_A=1 n_R=0 uncovered=1");
    assert!(result.stderr.contains("unreachable villages: far"));
}

#[test]
fn fixed_relay_count_below_the_topological_minimum_fails() {
    let result = run(&[
        "capex",
        "--scenario",
        &repo_scenario("six_village.json"),
        "--fixed-nr",
        "0",
    ]);
    assert_eq!(result.code, 1);
    assert!(result.stderr.contains("fixed n_R below topological minimum"));
}

#[test]
fn fixed_radius_outside_bounds_warns_but_runs() {
    let result = run(&[
        "capex",
        "--scenario",
        &repo_scenario("six_village.json"),
        "--fixed-radius",
        "0.6",
    ]);
    assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    assert!(result.stderr.contains("warning: fixed radius 0.6 km outside bounds"));
    assert!(result.stdout.contains("R_km=0.6"));
}

#[test]
fn opex_requires_an_energy_section() {
    let result = run(&["opex", "--scenario", &repo_scenario("six_village.json")]);
    assert_eq!(result.code, 1);
    assert!(result.stderr.contains("energy section required"));
}

#[test]
fn arbitrage_schedule_prints_the_reference_cost() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "arb.json", ARBITRAGE);
    let result = run(&["opex", "--scenario", &scenario]);
    assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    assert_eq!(result.stdout.trim(), "total_cost=5.5");
}

#[test]
fn zero_load_schedule_costs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "zero.json",
        &ARBITRAGE.replace("\"load\": [0.0, 1.0]", "\"load\": [0.0, 0.0]"),
    );
    let result = run(&["opex", "--scenario", &scenario]);
    assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    assert_eq!(result.stdout.trim(), "total_cost=0");
}

#[test]
fn unknown_keys_fail_strict_and_warn_lenient() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "extra.json",
        r#"{
          "villages": [ { "id": "v0", "position": [0.5, 0.5], "population": 100 } ],
          "ubs_position": [0.0, 0.0],
          "demographics": { "N": 100, "lambda": 10.0 },
          "satellite_backhaul": true
        }"#,
    );
    let strict = run(&["plan", "--scenario", &scenario]);
    assert_eq!(strict.code, 1);
    assert!(strict.stderr.contains("unknown key"), "stderr: {}", strict.stderr);

    let lenient = run(&["--lenient", "plan", "--scenario", &scenario]);
    assert_eq!(lenient.code, 0, "stderr: {}", lenient.stderr);
    assert!(lenient.stderr.contains("warning"));

    let via_env = run_with_env(
        &["plan", "--scenario", &scenario],
        &[("RURALPLAN_LENIENT", "1")],
    );
    assert_eq!(via_env.code, 0, "stderr: {}", via_env.stderr);
}

#[test]
fn repeated_runs_write_identical_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = repo_scenario("energy_day.json");
    let read = |stem: &Path| {
        let json = std::fs::read(PathBuf::from(format!("{}.json", stem.display()))).unwrap();
        let csv = std::fs::read(PathBuf::from(format!("{}.csv", stem.display()))).unwrap();
        let summary =
            std::fs::read(PathBuf::from(format!("{}_summary.csv", stem.display()))).unwrap();
        (json, csv, summary)
    };
    let first_stem = dir.path().join("first");
    let second_stem = dir.path().join("second");
    for stem in [&first_stem, &second_stem] {
        let result = run(&[
            "opex",
            "--scenario",
            &scenario,
            "--out",
            &stem.display().to_string(),
        ]);
        assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    }
    assert_eq!(read(&first_stem), read(&second_stem));
    // The sidecar carries the only timestamp; data files must not.
    let data = std::fs::read_to_string(format!("{}.json", first_stem.display())).unwrap();
    assert!(!data.contains("created_unix"));
    let sidecar =
        std::fs::read_to_string(format!("{}.run.json", first_stem.display())).unwrap();
    assert!(sidecar.contains("created_unix"));
}

#[test]
fn written_tables_parse_back_to_the_reported_results() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = repo_scenario("six_village.json");
    let stem = dir.path().join("sweep");
    let result = run(&[
        "sweep-relays",
        "--scenario",
        &scenario,
        "--max-nr",
        "4",
        "--out",
        &stem.display().to_string(),
    ]);
    assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    let text = std::fs::read_to_string(format!("{}.csv", stem.display())).unwrap();
    let series = ruralplan_core::capex::parse_sweep_csv(&text).unwrap();
    assert_eq!(series.len(), 5);
    for pair in series.windows(2) {
        let diff = pair[1].1 - pair[0].1;
        assert!((diff - 3.5).abs() <= 1e-9, "{diff}");
    }

    let stem = dir.path().join("plan");
    let result =
        run(&["plan", "--scenario", &scenario, "--out", &stem.display().to_string()]);
    assert_eq!(result.code, 0);
    let text = std::fs::read_to_string(format!("{}.csv", stem.display())).unwrap();
    let edges = ruralplan_core::topology::parse_edge_list_csv(&text).unwrap();
    assert_eq!(edges.len(), 4);
    assert!(edges.iter().any(|(site, parent, _, role)| {
        site == "vcc-2" && parent == "vcc-1" && role == "exclusive_ap"
    }));

    let stem = dir.path().join("bh");
    let result = run(&[
        "compare-backhaul",
        "--scenario",
        &scenario,
        "--fiber-km",
        "1,3",
        "--out",
        &stem.display().to_string(),
    ]);
    assert_eq!(result.code, 0);
    assert!(result.stderr.contains("baseline defaults to 10000 USD"));
    let text = std::fs::read_to_string(format!("{}.csv", stem.display())).unwrap();
    let options = ruralplan_core::capex::parse_backhaul_csv(&text).unwrap();
    assert_eq!(options.len(), 3);
    assert_eq!(options[1].ratio, 2.5);
    assert_eq!(options[2].ratio, 5.5);
}

#[test]
fn fixed_battery_capacity_flows_into_the_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "arb.json", ARBITRAGE);
    let result = run(&[
        "--json",
        "opex",
        "--scenario",
        &scenario,
        "--fixed-battery",
        "3",
    ]);
    assert_eq!(result.code, 0, "stderr: {}", result.stderr);
    let summary: serde_json::Value = serde_json::from_str(result.stdout.trim()).unwrap();
    assert_eq!(summary["e_b_max"], 3.0);
    assert_eq!(summary["total_cost"], 6.5);
}

#[test]
fn threshold_power_saving_needs_a_traffic_series() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "arb.json", ARBITRAGE);
    let result = run(&["opex", "--scenario", &scenario, "--threshold", "1.0"]);
    assert_eq!(result.code, 1);
    assert!(result.stderr.contains("traffic series required"));

    let reduced = run(&[
        "opex",
        "--scenario",
        &repo_scenario("energy_day.json"),
        "--threshold",
        "1.5",
    ]);
    assert_eq!(reduced.code, 0, "stderr: {}", reduced.stderr);
    let full = run(&["opex", "--scenario", &repo_scenario("energy_day.json")]);
    let cost = |r: &Run| -> f64 {
        r.stdout.trim().strip_prefix("total_cost=").unwrap().parse().unwrap()
    };
    assert!(cost(&reduced) < cost(&full));
}
