use std::fmt;

use super::{CycleModel, SwitchedSystem, TimeKind};

/// Minimum reciprocal condition number for a discrete-time mode matrix to
/// count as invertible.
pub const RCOND_FLOOR: f64 = 1e-12;

/// How positivity of the system (used when `m` is odd) is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositivityAssertion {
    /// Sufficient test: Metzler modes (continuous) or nonnegative modes
    /// (discrete).
    #[default]
    MetzlerCheck,
    /// The caller vouches that the system is positive.
    UserAsserted,
    /// Positivity is not considered.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Asserted,
    NotApplicable,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Asserted => "asserted",
            CheckStatus::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub status: CheckStatus,
    pub detail: String,
}

impl AssumptionCheck {
    fn new(status: CheckStatus, detail: impl Into<String>) -> Self {
        Self {
            status,
            detail: detail.into(),
        }
    }
}

/// A1: m even or system positive. A2: cycle length essentially bounded.
/// A3: mode matrices bounded. A4 (discrete time): modes invertible with
/// bounded inverses.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub a1: AssumptionCheck,
    pub a2: AssumptionCheck,
    pub a3: AssumptionCheck,
    pub a4: AssumptionCheck,
}

impl AssumptionReport {
    pub fn checks(&self) -> [(&'static str, &AssumptionCheck); 4] {
        [
            ("A1", &self.a1),
            ("A2", &self.a2),
            ("A3", &self.a3),
            ("A4", &self.a4),
        ]
    }

    /// Identifiers of the assumptions that failed.
    pub fn failed(&self) -> Vec<&'static str> {
        self.checks()
            .into_iter()
            .filter(|(_, c)| c.status == CheckStatus::Fail)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn all_hold(&self) -> bool {
        self.failed().is_empty()
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, c) in self.checks() {
            writeln!(f, "{id}: {} ({})", c.status.as_str(), c.detail)?;
        }
        Ok(())
    }
}

fn is_metzler(a: &crate::linalg::Matrix) -> bool {
    (0..a.rows()).all(|i| (0..a.cols()).all(|j| i == j || a[(i, j)] >= 0.0))
}

fn is_nonnegative(a: &crate::linalg::Matrix) -> bool {
    a.as_slice().iter().all(|&v| v >= 0.0)
}

pub fn check_assumptions(
    system: &SwitchedSystem,
    model: &dyn CycleModel,
    m: usize,
    positivity: PositivityAssertion,
) -> AssumptionReport {
    let a1 = if m % 2 == 0 {
        AssumptionCheck::new(CheckStatus::Pass, format!("m = {m} is even"))
    } else {
        match positivity {
            PositivityAssertion::UserAsserted => AssumptionCheck::new(
                CheckStatus::Asserted,
                format!("m = {m} is odd; positivity asserted by user"),
            ),
            PositivityAssertion::MetzlerCheck => {
                let (test, name): (fn(&crate::linalg::Matrix) -> bool, &str) =
                    match system.time_kind() {
                        TimeKind::Continuous => (is_metzler, "Metzler"),
                        TimeKind::Discrete => (is_nonnegative, "entrywise nonnegative"),
                    };
                let offenders: Vec<String> = system
                    .modes()
                    .filter(|(_, a)| !test(a))
                    .map(|(s, _)| s.to_string())
                    .collect();
                if offenders.is_empty() {
                    AssumptionCheck::new(
                        CheckStatus::Pass,
                        format!("m = {m} is odd; all modes are {name}, so the system is positive"),
                    )
                } else {
                    AssumptionCheck::new(
                        CheckStatus::Fail,
                        format!(
                            "m = {m} is odd and mode(s) {} are not {name}; positivity cannot be \
                             established automatically (assert it with --assert-positive if the \
                             system is known to be positive)",
                            offenders.join(", ")
                        ),
                    )
                }
            }
            PositivityAssertion::None => AssumptionCheck::new(
                CheckStatus::Fail,
                format!("m = {m} is odd and positivity was not checked or asserted"),
            ),
        }
    };

    let a2 = match model.max_length() {
        Some(r) if r.is_finite() => {
            AssumptionCheck::new(CheckStatus::Pass, format!("cycle length bounded by {r}"))
        }
        _ => AssumptionCheck::new(
            CheckStatus::Fail,
            "cycle model declares no essential bound on the cycle length",
        ),
    };

    let a3 = if system.modes().all(|(_, a)| a.is_finite()) {
        let bound = system.modes().map(|(_, a)| a.norm1()).fold(0.0, f64::max);
        AssumptionCheck::new(
            CheckStatus::Pass,
            format!("{} finite mode matrices, max 1-norm {bound:.6}", system.mode_count()),
        )
    } else {
        AssumptionCheck::new(CheckStatus::Fail, "mode matrix with non-finite entries")
    };

    let a4 = match system.time_kind() {
        TimeKind::Continuous => {
            AssumptionCheck::new(CheckStatus::NotApplicable, "continuous-time system")
        }
        TimeKind::Discrete => {
            let bad: Vec<String> = system
                .modes()
                .filter(|(_, a)| a.rcond() <= RCOND_FLOOR)
                .map(|(s, _)| s.to_string())
                .collect();
            if bad.is_empty() {
                AssumptionCheck::new(CheckStatus::Pass, "all modes invertible")
            } else {
                AssumptionCheck::new(
                    CheckStatus::Fail,
                    format!(
                        "mode(s) {} singular or ill-conditioned (rcond <= {RCOND_FLOOR:e})",
                        bad.join(", ")
                    ),
                )
            }
        }
    };

    AssumptionReport { a1, a2, a3, a4 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::regen::{Cycle, MaintenanceModel, PeriodicModel, Segment, StreamRng};

    struct Unbounded;
    impl CycleModel for Unbounded {
        fn time_kind(&self) -> TimeKind {
            TimeKind::Continuous
        }
        fn max_length(&self) -> Option<f64> {
            None
        }
        fn draw(&self, _rng: &mut StreamRng) -> Cycle {
            Cycle::new(vec![Segment::new(1, 1.0)]).unwrap()
        }
    }

    fn example2() -> SwitchedSystem {
        SwitchedSystem::continuous(vec![
            Matrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap(),
            Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn even_degree_passes_a1() {
        let model = MaintenanceModel::new(1.0, 0.1, 1.0).unwrap();
        let r = check_assumptions(&example2(), &model, 2, PositivityAssertion::None);
        assert_eq!(r.a1.status, CheckStatus::Pass);
        assert!(r.all_hold());
        assert_eq!(r.a4.status, CheckStatus::NotApplicable);
    }

    #[test]
    fn odd_degree_metzler() {
        let sys = SwitchedSystem::continuous(vec![
            Matrix::from_rows(&[[-1.0, 0.5], [0.2, -2.0]]).unwrap(),
            Matrix::from_rows(&[[0.3, 0.0], [1.0, -0.1]]).unwrap(),
        ])
        .unwrap();
        let model = MaintenanceModel::new(1.0, 0.1, 1.0).unwrap();
        let r = check_assumptions(&sys, &model, 3, PositivityAssertion::MetzlerCheck);
        assert_eq!(r.a1.status, CheckStatus::Pass);
    }

    #[test]
    fn odd_degree_non_metzler_fails_with_hint() {
        let model = MaintenanceModel::new(1.0, 0.1, 1.0).unwrap();
        let r = check_assumptions(&example2(), &model, 3, PositivityAssertion::MetzlerCheck);
        assert_eq!(r.a1.status, CheckStatus::Fail);
        assert!(r.a1.detail.contains("assert-positive"));
        assert!(r.a1.detail.contains("mode(s) 2"));
        assert_eq!(r.failed(), vec!["A1"]);

        let r = check_assumptions(&example2(), &model, 3, PositivityAssertion::UserAsserted);
        assert_eq!(r.a1.status, CheckStatus::Asserted);
        assert!(r.all_hold());
    }

    #[test]
    fn unbounded_model_fails_a2() {
        let r = check_assumptions(&example2(), &Unbounded, 2, PositivityAssertion::None);
        assert_eq!(r.a2.status, CheckStatus::Fail);
    }

    #[test]
    fn discrete_invertibility() {
        let sing = SwitchedSystem::discrete(vec![
            Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap(),
            Matrix::identity(2),
        ])
        .unwrap();
        let c = Cycle::new(vec![Segment::new(1, 1.0)]).unwrap();
        let model = PeriodicModel::new(TimeKind::Discrete, c).unwrap();
        let r = check_assumptions(&sing, &model, 2, PositivityAssertion::None);
        assert_eq!(r.a4.status, CheckStatus::Fail);
        assert!(r.a4.detail.contains("mode(s) 1"));

        let nonneg = SwitchedSystem::discrete(vec![Matrix::identity(2).scale(0.5)]).unwrap();
        let r = check_assumptions(&nonneg, &model, 3, PositivityAssertion::MetzlerCheck);
        assert_eq!(r.a1.status, CheckStatus::Pass);
        assert_eq!(r.a4.status, CheckStatus::Pass);
    }
}
