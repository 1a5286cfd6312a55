//! Checks the simplex solver against a literal objective scan over a
//! feasible box. Generated programs keep the origin feasible (nonnegative
//! rows) and every variable boxed, so they are always solvable and
//! bounded; the grid minimum then upper-bounds the true optimum and the
//! solver must land at or below it, within the grid resolution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruralplan_core::lp::{ConstraintSense, LinearProgram, LpStatus};

struct Instance {
    lp: LinearProgram,
    objective: Vec<f64>,
    boxes: Vec<f64>,
}

fn random_instance(rng: &mut ChaCha8Rng, num_vars: usize) -> Instance {
    let boxes: Vec<f64> = (0..num_vars).map(|_| rng.gen_range(0.5..=2.0)).collect();
    let objective: Vec<f64> = (0..num_vars).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let mut lp = LinearProgram::new(num_vars);
    lp.set_objective(objective.clone());
    for (i, &u) in boxes.iter().enumerate() {
        lp.add_upper_bound(i, u);
    }
    for _ in 0..rng.gen_range(1..=3) {
        let coefficients: Vec<f64> = (0..num_vars).map(|_| rng.gen_range(0.0..=1.5)).collect();
        let reach: f64 = coefficients.iter().zip(&boxes).map(|(c, u)| c * u).sum();
        if reach <= 0.0 {
            continue;
        }
        let rhs = rng.gen_range(0.3..=1.0) * reach;
        lp.add_constraint(coefficients, ConstraintSense::Le, rhs);
    }
    Instance { lp, objective, boxes }
}

fn grid_minimum(instance: &Instance, per_axis: usize) -> f64 {
    let n = instance.boxes.len();
    let mut index = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; n];
    loop {
        for i in 0..n {
            x[i] = instance.boxes[i] * index[i] as f64 / (per_axis - 1) as f64;
        }
        if instance.lp.check_feasibility(&x, 1e-9).passes() {
            let value: f64 = instance.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            best = best.min(value);
        }
        let mut axis = 0;
        loop {
            if axis == n {
                return best;
            }
            index[axis] += 1;
            if index[axis] < per_axis {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

#[test]
fn solver_beats_or_ties_the_grid_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9121d);
    for case in 0..15 {
        let num_vars = rng.gen_range(2..=4);
        let per_axis = match num_vars {
            2 => 1_001,
            3 => 101,
            _ => 41,
        };
        let instance = random_instance(&mut rng, num_vars);
        let solution = instance.lp.solve();
        assert_eq!(solution.status, LpStatus::Optimal, "case {case}");
        assert!(
            instance.lp.check_feasibility(&solution.x, 1e-6).passes(),
            "case {case}: solver point infeasible"
        );
        let grid = grid_minimum(&instance, per_axis);
        assert!(grid.is_finite(), "case {case}: grid found no feasible point");
        assert!(
            solution.objective_value <= grid + 1e-4,
            "case {case}: solver {} above grid {}",
            solution.objective_value,
            grid
        );
        // Loose lower guard: the grid can overshoot the optimum only by
        // the objective variation across one cell.
        let cell_slack: f64 = instance
            .objective
            .iter()
            .zip(&instance.boxes)
            .map(|(c, u)| c.abs() * u / (per_axis - 1) as f64)
            .sum();
        assert!(
            solution.objective_value >= grid - num_vars as f64 * cell_slack - 1e-6,
            "case {case}: solver {} implausibly below grid {}",
            solution.objective_value,
            grid
        );
    }
}
