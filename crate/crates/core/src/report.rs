//! Constraint-check reports shared by the plan and cost verifiers.

use serde::{Deserialize, Serialize};

/// Worst residual per constraint family; the check passes when every
/// residual is at or below the tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub tolerance: f64,
    /// `(family name, worst residual)` in check order.
    pub residuals: Vec<(String, f64)>,
}

impl ConstraintReport {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance, residuals: Vec::new() }
    }

    pub fn record(&mut self, family: &str, residual: f64) {
        self.residuals.push((family.to_string(), residual));
    }

    pub fn passes(&self) -> bool {
        self.residuals.iter().all(|(_, r)| *r <= self.tolerance)
    }

    /// Families whose residual exceeds the tolerance.
    pub fn violations(&self) -> Vec<&str> {
        self.residuals
            .iter()
            .filter(|(_, r)| *r > self.tolerance)
            .map(|(name, _)| name.as_str())
            .collect()
    }

    pub fn worst(&self) -> f64 {
        self.residuals.iter().fold(0.0, |acc, (_, r)| acc.max(*r))
    }
}

impl std::fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, residual) in &self.residuals {
            let mark = if *residual <= self.tolerance { "ok" } else { "VIOLATED" };
            writeln!(f, "{name}: residual {residual:e} [{mark}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_iff_all_within_tolerance() {
        let mut report = ConstraintReport::new(1e-7);
        report.record("alpha", 0.0);
        report.record("beta", 5e-8);
        assert!(report.passes());
        assert!(report.violations().is_empty());

        report.record("gamma", 1e-3);
        assert!(!report.passes());
        assert_eq!(report.violations(), vec!["gamma"]);
        assert_eq!(report.worst(), 1e-3);
    }
}
