//! Dense two-phase primal simplex for small linear programs.
//!
//! Solves `min c.x` subject to `A x {<=, =, >=} b`, `x >= 0`. Rows are
//! equilibrated (divided by their largest absolute coefficient) before
//! solving, negative right-hand sides are flipped, and inequality rows get
//! slack or surplus columns; `>=` and `=` rows get phase-1 artificials.
//! Pricing is Dantzig's rule with a smallest-index tie-break, switching to
//! Bland's rule after a run of degenerate pivots so cycling cannot occur.
//! The reported objective is recomputed as `c.x` from the extracted point,
//! not read off the tableau, so it carries no accumulated pivot drift.

/// Entries with absolute value at or below this never serve as pivots.
pub const PIVOT_TOLERANCE: f64 = 1e-10;
/// Phase-1 objective above this declares the program infeasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;
/// Reduced costs above `-REDUCED_COST_TOLERANCE` count as nonnegative.
pub const REDUCED_COST_TOLERANCE: f64 = 1e-9;
/// Hard cap on simplex iterations across both phases.
pub const MAX_ITERATIONS: usize = 100_000;

/// A ratio-test step at or below this counts as a degenerate pivot.
const DEGENERATE_STEP: f64 = 1e-12;
/// Ratios closer than this tie; the row with the smallest basic column wins.
const RATIO_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

/// `min c.x` subject to `A x {<=, =, >=} b`, `x >= 0`, with optional
/// per-variable upper bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<(Vec<f64>, ConstraintSense, f64)>,
    upper_bounds: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iteration cap was hit before reaching an optimum.
    IterationLimit,
}

/// Solver outcome; `x` and `objective_value` are meaningful only when
/// `status` is [`LpStatus::Optimal`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, iterations: usize) -> Self {
        Self { status, objective_value: f64::NAN, x: Vec::new(), iterations }
    }
}

/// Worst residuals of a point against a program's constraint blocks.
#[derive(Debug, Clone, Copy)]
pub struct FeasibilityReport {
    pub max_equality_residual: f64,
    pub max_inequality_violation: f64,
    pub max_bound_violation: f64,
    pub tolerance: f64,
}

impl FeasibilityReport {
    pub fn passes(&self) -> bool {
        self.max_equality_residual <= self.tolerance
            && self.max_inequality_violation <= self.tolerance
            && self.max_bound_violation <= self.tolerance
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            upper_bounds: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Declared rows; upper bounds materialize as extra rows on top.
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Panics on a length mismatch or a non-finite coefficient.
    pub fn set_objective(&mut self, coefficients: Vec<f64>) {
        assert_eq!(coefficients.len(), self.num_vars, "objective length mismatch");
        assert!(coefficients.iter().all(|c| c.is_finite()), "non-finite objective coefficient");
        self.objective = coefficients;
    }

    /// Panics on a length mismatch or a non-finite coefficient.
    pub fn add_constraint(&mut self, coefficients: Vec<f64>, sense: ConstraintSense, rhs: f64) {
        assert_eq!(coefficients.len(), self.num_vars, "constraint length mismatch");
        assert!(
            coefficients.iter().all(|c| c.is_finite()) && rhs.is_finite(),
            "non-finite constraint coefficient"
        );
        self.constraints.push((coefficients, sense, rhs));
    }

    /// Adds `x[var] <= bound`; materialized as an extra row at solve time.
    pub fn add_upper_bound(&mut self, var: usize, bound: f64) {
        assert!(var < self.num_vars, "variable index out of range");
        assert!(bound.is_finite() && bound >= 0.0, "upper bound must be finite and nonnegative");
        self.upper_bounds.push((var, bound));
    }

    pub fn solve(&self) -> LpSolution {
        self.solve_with_cap(MAX_ITERATIONS)
    }

    fn solve_with_cap(&self, max_iterations: usize) -> LpSolution {
        Tableau::build(self).solve(&self.objective, max_iterations)
    }

    /// Worst residuals of `x` against all rows and bounds. Panics on a
    /// length mismatch.
    pub fn check_feasibility(&self, x: &[f64], tolerance: f64) -> FeasibilityReport {
        assert_eq!(x.len(), self.num_vars, "point length mismatch");
        let mut equality = 0.0f64;
        let mut inequality = 0.0f64;
        for (coeffs, sense, rhs) in &self.constraints {
            let lhs: f64 = coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            match sense {
                ConstraintSense::Eq => equality = equality.max((lhs - rhs).abs()),
                ConstraintSense::Le => inequality = inequality.max(lhs - rhs),
                ConstraintSense::Ge => inequality = inequality.max(rhs - lhs),
            }
        }
        let mut bounds = x.iter().fold(0.0f64, |acc, &v| acc.max(-v));
        for &(var, bound) in &self.upper_bounds {
            bounds = bounds.max(x[var] - bound);
        }
        FeasibilityReport {
            max_equality_residual: equality,
            max_inequality_violation: inequality.max(0.0),
            max_bound_violation: bounds,
            tolerance,
        }
    }
}

/// Debug dump for fixture authoring: one text line per row.
impl std::fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "min {:?}", self.objective)?;
        for (coeffs, sense, rhs) in &self.constraints {
            let op = match sense {
                ConstraintSense::Le => "<=",
                ConstraintSense::Eq => "=",
                ConstraintSense::Ge => ">=",
            };
            writeln!(f, "  {coeffs:?} {op} {rhs}")?;
        }
        for (var, bound) in &self.upper_bounds {
            writeln!(f, "  x[{var}] <= {bound}")?;
        }
        Ok(())
    }
}

struct Tableau {
    /// Constraint matrix after adding slack/surplus/artificial columns,
    /// row-equilibrated, with nonnegative right-hand sides.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    num_structural: usize,
    /// Total columns including slacks and artificials.
    num_cols: usize,
    /// Artificial columns; never priced for entry.
    artificial_from: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let mut source_rows = lp.constraints.clone();
        for &(var, bound) in &lp.upper_bounds {
            let mut coeffs = vec![0.0; n];
            coeffs[var] = 1.0;
            source_rows.push((coeffs, ConstraintSense::Le, bound));
        }
        let m = source_rows.len();
        // Flip rows with negative rhs so the all-slack/artificial start
        // point is feasible for phase 1.
        let mut rows: Vec<(Vec<f64>, ConstraintSense, f64)> = source_rows
            .iter()
            .map(|(coeffs, sense, rhs)| {
                let mut coeffs = coeffs.clone();
                let mut sense = *sense;
                let mut rhs = *rhs;
                if rhs < 0.0 {
                    for c in &mut coeffs {
                        *c = -*c;
                    }
                    rhs = -rhs;
                    sense = match sense {
                        ConstraintSense::Le => ConstraintSense::Ge,
                        ConstraintSense::Ge => ConstraintSense::Le,
                        ConstraintSense::Eq => ConstraintSense::Eq,
                    };
                }
                (coeffs, sense, rhs)
            })
            .collect();
        for (coeffs, _, rhs) in &mut rows {
            let scale = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
            if scale > 0.0 {
                for c in coeffs.iter_mut() {
                    *c /= scale;
                }
                *rhs /= scale;
            }
        }

        let num_slack = rows
            .iter()
            .filter(|(_, s, _)| matches!(s, ConstraintSense::Le | ConstraintSense::Ge))
            .count();
        let num_artificial = rows
            .iter()
            .filter(|(_, s, _)| matches!(s, ConstraintSense::Ge | ConstraintSense::Eq))
            .count();
        let artificial_from = n + num_slack;
        let num_cols = artificial_from + num_artificial;

        let mut a = vec![vec![0.0; num_cols]; m];
        let mut b = vec![0.0; m];
        let mut basis = vec![0usize; m];
        let mut next_slack = n;
        let mut next_artificial = artificial_from;
        for (i, (coeffs, sense, rhs)) in rows.into_iter().enumerate() {
            a[i][..n].copy_from_slice(&coeffs);
            b[i] = rhs;
            match sense {
                ConstraintSense::Le => {
                    a[i][next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                ConstraintSense::Ge => {
                    a[i][next_slack] = -1.0;
                    next_slack += 1;
                    a[i][next_artificial] = 1.0;
                    basis[i] = next_artificial;
                    next_artificial += 1;
                }
                ConstraintSense::Eq => {
                    a[i][next_artificial] = 1.0;
                    basis[i] = next_artificial;
                    next_artificial += 1;
                }
            }
        }
        Self { a, b, basis, num_structural: n, num_cols, artificial_from }
    }

    fn solve(mut self, objective: &[f64], max_iterations: usize) -> LpSolution {
        let mut iterations = 0usize;
        if self.artificial_from < self.num_cols {
            let mut phase1 = vec![0.0; self.num_cols];
            for c in &mut phase1[self.artificial_from..] {
                *c = 1.0;
            }
            match self.run_phase(&phase1, max_iterations, &mut iterations) {
                PhaseEnd::Optimal(value) => {
                    if value > FEASIBILITY_TOLERANCE {
                        return LpSolution::non_optimal(LpStatus::Infeasible, iterations);
                    }
                }
                PhaseEnd::Unbounded => {
                    // Phase 1 is bounded below by zero; reaching this arm
                    // means the ratio test lost all usable pivots.
                    return LpSolution::non_optimal(LpStatus::Infeasible, iterations);
                }
                PhaseEnd::IterationLimit => {
                    return LpSolution::non_optimal(LpStatus::IterationLimit, iterations);
                }
            }
            self.evict_artificials();
        }

        let mut phase2 = vec![0.0; self.num_cols];
        phase2[..self.num_structural].copy_from_slice(objective);
        match self.run_phase(&phase2, max_iterations, &mut iterations) {
            PhaseEnd::Optimal(_) => {
                let x = self.extract();
                let objective_value = dot(objective, &x);
                LpSolution { status: LpStatus::Optimal, objective_value, x, iterations }
            }
            PhaseEnd::Unbounded => LpSolution::non_optimal(LpStatus::Unbounded, iterations),
            PhaseEnd::IterationLimit => {
                LpSolution::non_optimal(LpStatus::IterationLimit, iterations)
            }
        }
    }

    fn run_phase(
        &mut self,
        cost: &[f64],
        max_iterations: usize,
        iterations: &mut usize,
    ) -> PhaseEnd {
        let m = self.a.len();
        // Reduced costs r_j = c_j - c_B . B^-1 A_j, rebuilt at phase entry
        // and maintained by pivoting within the phase.
        let mut reduced = cost.to_vec();
        let mut value = 0.0;
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.num_cols {
                    reduced[j] -= cb * self.a[i][j];
                }
                value += cb * self.b[i];
            }
        }

        let bland_threshold = 2 * (m + self.num_cols);
        let mut degenerate_streak = 0usize;
        let mut use_bland = false;
        loop {
            if *iterations >= max_iterations {
                return PhaseEnd::IterationLimit;
            }
            let entering = self.price(&reduced, use_bland);
            let Some(col) = entering else {
                return PhaseEnd::Optimal(value);
            };
            let Some((row, degenerate)) = self.ratio_test(col) else {
                return PhaseEnd::Unbounded;
            };
            *iterations += 1;
            if degenerate {
                degenerate_streak += 1;
                if degenerate_streak >= bland_threshold {
                    use_bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
            self.pivot(row, col, &mut reduced, &mut value);
        }
    }

    /// Entering column, or `None` at optimality. Artificials never enter.
    fn price(&self, reduced: &[f64], use_bland: bool) -> Option<usize> {
        if use_bland {
            return (0..self.artificial_from).find(|&j| reduced[j] < -REDUCED_COST_TOLERANCE);
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.artificial_from {
            let r = reduced[j];
            if r < -REDUCED_COST_TOLERANCE && best.map_or(true, |(_, br)| r < br) {
                best = Some((j, r));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Leaving row for `col` and whether the step is degenerate; `None`
    /// means the column is unbounded.
    fn ratio_test(&self, col: usize) -> Option<(usize, bool)> {
        let mut choice: Option<(usize, f64)> = None;
        for i in 0..self.a.len() {
            let coeff = self.a[i][col];
            if coeff <= PIVOT_TOLERANCE {
                continue;
            }
            // Tiny negative drift in b would otherwise produce a negative
            // step; treat it as zero.
            let ratio = self.b[i].max(0.0) / coeff;
            let better = match choice {
                None => true,
                Some((row, best)) => {
                    ratio < best - RATIO_TIE
                        || (ratio < best + RATIO_TIE && self.basis[i] < self.basis[row])
                }
            };
            if better {
                choice = Some((i, ratio));
            }
        }
        choice.map(|(row, ratio)| (row, ratio <= DEGENERATE_STEP))
    }

    fn pivot(&mut self, row: usize, col: usize, reduced: &mut [f64], value: &mut f64) {
        let inv = 1.0 / self.a[row][col];
        for j in 0..self.num_cols {
            self.a[row][j] *= inv;
        }
        self.b[row] *= inv;
        self.a[row][col] = 1.0;
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.num_cols {
                self.a[i][j] -= factor * self.a[row][j];
            }
            self.a[i][col] = 0.0;
            self.b[i] -= factor * self.b[row];
        }
        let factor = reduced[col];
        if factor != 0.0 {
            for j in 0..self.num_cols {
                reduced[j] -= factor * self.a[row][j];
            }
            reduced[col] = 0.0;
            *value += factor * self.b[row];
        }
        self.basis[row] = col;
    }

    /// After phase 1: pivot zero-level artificials out of the basis, or drop
    /// their rows as redundant when no structural or slack pivot exists.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.a.len() {
            if self.basis[i] < self.artificial_from {
                i += 1;
                continue;
            }
            let pivot_col =
                (0..self.artificial_from).find(|&j| self.a[i][j].abs() > PIVOT_TOLERANCE);
            match pivot_col {
                Some(col) => {
                    let mut unused = vec![0.0; self.num_cols];
                    let mut scrap = 0.0;
                    self.pivot(i, col, &mut unused, &mut scrap);
                    i += 1;
                }
                None => {
                    self.a.remove(i);
                    self.b.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn extract(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.num_structural];
        for (i, &col) in self.basis.iter().enumerate() {
            if col < self.num_structural {
                x[col] = self.b[i].max(0.0);
            }
        }
        x
    }
}

enum PhaseEnd {
    Optimal(f64),
    Unbounded,
    IterationLimit,
}

fn dot(c: &[f64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}
