//! Inequality checks with slack bookkeeping.

use serde::Serialize;

/// One inequality `lhs ≤ rhs`; `slack = rhs − lhs`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub witness: String,
}

impl Check {
    pub fn new(claim: impl Into<String>, lhs: f64, rhs: f64, witness: impl Into<String>) -> Self {
        let slack = if lhs.is_infinite() && rhs.is_infinite() && lhs > 0.0 && rhs > 0.0 {
            0.0
        } else {
            rhs - lhs
        };
        Self { claim: claim.into(), lhs, rhs, slack, witness: witness.into() }
    }

    /// Slack divided by the magnitude of the larger side (at least 1).
    pub fn scaled_slack(&self) -> f64 {
        let mag = self.lhs.abs().max(self.rhs.abs()).max(1.0);
        if mag.is_finite() {
            self.slack / mag
        } else {
            self.slack.signum()
        }
    }
}

/// Aggregated outcome of many checks of one claim family.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub tol: f64,
    pub checks: usize,
    pub violations: usize,
    pub worst: Option<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(name: impl Into<String>, tol: f64) -> Self {
        Self { name: name.into(), tol, checks: 0, violations: 0, worst: None, notes: Vec::new(), pass: true }
    }

    pub fn record(&mut self, check: Check) {
        self.checks += 1;
        let s = check.scaled_slack();
        if !(s >= -self.tol) {
            self.violations += 1;
            self.pass = false;
        }
        let worse = match &self.worst {
            None => true,
            Some(w) => s < w.scaled_slack() || s.is_nan(),
        };
        if worse {
            self.worst = Some(check);
        }
    }

    pub fn check(&mut self, claim: &str, lhs: f64, rhs: f64, witness: impl FnOnce() -> String) {
        let c = Check::new(claim, lhs, rhs, String::new());
        let s = c.scaled_slack();
        let replace = self.worst.as_ref().map_or(true, |w| s < w.scaled_slack()) || !(s >= -self.tol);
        if replace {
            self.record(Check { witness: witness(), ..c });
        } else {
            self.checks += 1;
        }
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn fail(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
        self.pass = false;
    }

    pub fn merge(&mut self, other: Report) {
        self.checks += other.checks;
        self.violations += other.violations;
        self.pass &= other.pass;
        if let Some(w) = other.worst {
            let better = self.worst.as_ref().map_or(true, |mine| w.scaled_slack() < mine.scaled_slack());
            if better {
                self.worst = Some(w);
            }
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("{}: {n}", other.name)));
    }

    pub fn worst_slack(&self) -> f64 {
        self.worst.as_ref().map_or(f64::INFINITY, |w| w.scaled_slack())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_worst_and_violations() {
        let mut r = Report::new("t", 1e-9);
        r.check("a", 1.0, 2.0, || "x".into());
        r.check("a", 2.0, 2.0 - 1e-12, || "y".into());
        assert!(r.pass);
        r.check("a", 3.0, 2.0, || "z".into());
        assert!(!r.pass);
        assert_eq!(r.violations, 1);
        assert_eq!(r.worst.as_ref().unwrap().witness, "z");
        assert_eq!(r.checks, 3);
    }

    #[test]
    fn infinite_sides_are_tight() {
        assert_eq!(Check::new("c", f64::INFINITY, f64::INFINITY, "").slack, 0.0);
    }
}
