//! Cross-checks the interval-based optimizer against the exhaustive grid
//! scan on randomized instances, with and without access-point price
//! curves.
//!
//! The generator keeps the two methods comparable: price-curve breakpoints
//! land exactly on the scan grid, and the relay floor is admissible at
//! every radius, so both methods must agree on the chosen counts and, to
//! small relative error, on the objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruralplan_core::capex::{
    brute_force_capex, brute_force_capex_serial, optimize_capex, total_vcc_count, verify_capex_result,
    CapexInputs,
};
use ruralplan_core::scenario::{PiecewiseLinear, UnitCosts};

const GRID_SAMPLES: usize = 2_000;

fn random_inputs(rng: &mut ChaCha8Rng, with_curve: bool) -> CapexInputs {
    let users: u64 = rng.gen_range(50..=10_000);
    let area: f64 = rng.gen_range(1.0..=500.0);
    let r_min: f64 = rng.gen_range(0.25..=0.35);
    let r_max: f64 = rng.gen_range(0.40..=0.45);
    let c_u = 3500.0 * rng.gen_range(0.5..=1.5);
    let c_a = 1900.0 * rng.gen_range(0.5..=1.5);

    let step = (r_max - r_min) / (GRID_SAMPLES - 1) as f64;
    let curve = with_curve.then(|| {
        let count = rng.gen_range(3..=6);
        let mut indices: Vec<usize> = (0..count)
            .map(|_| rng.gen_range(1..GRID_SAMPLES - 1))
            .collect();
        indices.sort_unstable();
        indices.dedup();
        let mut cost = c_a * rng.gen_range(0.5..=0.8);
        let points: Vec<(f64, f64)> = indices
            .iter()
            .map(|&i| {
                let point = (r_min + step * i as f64, cost);
                cost += c_a * rng.gen_range(0.0..=0.4);
                point
            })
            .collect();
        PiecewiseLinear::new(points).expect("generated curve is valid")
    });
    let access_point = curve.as_ref().map_or(c_a, |c| c.value(r_max));
    let unit_costs = UnitCosts {
        ubs: c_u,
        access_point,
        relay: access_point + c_u,
        access_point_curve: curve,
    };

    let relay_cap = total_vcc_count(area, r_max).unwrap() / 2;
    let min_relays = rng.gen_range(0..=3).min(relay_cap);
    CapexInputs {
        area_km2: area,
        users,
        density: users as f64 / area,
        unit_costs,
        radius_bounds_km: (r_min, r_max),
        min_relays,
    }
}

#[test]
fn optimizer_matches_grid_scan_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    for case in 0..40 {
        let inputs = random_inputs(&mut rng, case % 2 == 1);
        let exact = optimize_capex(&inputs).unwrap();
        let brute = brute_force_capex(&inputs, GRID_SAMPLES).unwrap();
        assert!(exact.feasible && brute.feasible, "case {case} unexpectedly infeasible");
        assert_eq!(
            (exact.n_a, exact.n_r),
            (brute.n_a, brute.n_r),
            "case {case}: counts diverge at R {} vs {}",
            exact.r_star_km,
            brute.r_star_km
        );
        let rel = (exact.cost_per_user - brute.cost_per_user).abs() / brute.cost_per_user;
        assert!(
            rel <= 1e-6,
            "case {case}: cost {} vs {} (rel {rel})",
            exact.cost_per_user,
            brute.cost_per_user
        );
        assert!(verify_capex_result(&inputs, &exact, 1e-7).passes(), "case {case}");
    }
}

#[test]
fn parallel_and_serial_scans_agree_to_the_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd15c_0b01);
    for case in 0..10 {
        let inputs = random_inputs(&mut rng, case % 2 == 0);
        let parallel = brute_force_capex(&inputs, 1_500).unwrap();
        let serial = brute_force_capex_serial(&inputs, 1_500).unwrap();
        assert_eq!(parallel.to_json_pretty(), serial.to_json_pretty(), "case {case}");
    }
}

#[test]
fn repeated_optimizer_runs_are_byte_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd_ba11);
    for case in 0..10 {
        let inputs = random_inputs(&mut rng, case % 2 == 0);
        let first = optimize_capex(&inputs).unwrap();
        let second = optimize_capex(&inputs).unwrap();
        assert_eq!(first.to_json_pretty(), second.to_json_pretty(), "case {case}");
    }
}
