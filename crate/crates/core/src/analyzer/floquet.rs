use super::decision::{decide_stability, Verdict};
use super::expectation::LiftedExpectation;
use super::transition::cycle_transition;
use crate::error::Result;
use crate::lift::lift_matrix;
use crate::linalg::{spectral_radius, Matrix};
use crate::regen::{PeriodicModel, SwitchedSystem};

/// Relative tolerance for `ρ(M^[m]) = ρ(M)^m`.
pub const FLOQUET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetReport {
    pub degree: usize,
    pub rho_transition: f64,
    pub rho_lifted: f64,
    pub relative_error: f64,
    pub identity_holds: bool,
    /// Verdict from `ρ(M) < 1`.
    pub classical_verdict: Verdict,
    /// Verdict from the lifted expectation, which for a deterministic cycle
    /// is `M^[m]` itself.
    pub lifted_verdict: Verdict,
    pub agrees: bool,
}

/// Checks the periodic special case on a one-cycle transition matrix.
pub fn floquet_check_matrix(transition: &Matrix, m: usize) -> Result<FloquetReport> {
    let lifted = lift_matrix(transition, m)?;
    let rho_transition = spectral_radius(transition)?.radius;
    let expectation = LiftedExpectation::exact(lifted.basis, lifted.matrix);
    let report = decide_stability(&expectation, None)?;
    let want = rho_transition.powi(m as i32);
    let relative_error = if want == 0.0 {
        report.rho
    } else {
        (report.rho - want).abs() / want
    };
    let classical_verdict = Verdict::from_radius(rho_transition);
    Ok(FloquetReport {
        degree: m,
        rho_transition,
        rho_lifted: report.rho,
        relative_error,
        identity_holds: relative_error <= FLOQUET_TOL,
        classical_verdict,
        lifted_verdict: report.verdict,
        agrees: classical_verdict == report.verdict,
    })
}

pub fn floquet_check(
    system: &SwitchedSystem,
    model: &PeriodicModel,
    m: usize,
) -> Result<FloquetReport> {
    super::expectation::ensure_same_time_kind(system, model)?;
    let t = cycle_transition(system, model.cycle())?;
    floquet_check_matrix(&t.matrix, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regen::{Cycle, Segment, TimeKind};

    #[test]
    fn diagonal_transition() {
        let r = floquet_check_matrix(&Matrix::from_diag(&[0.5, 0.2]), 2).unwrap();
        assert!((r.rho_lifted - 0.25).abs() < 1e-15);
        assert!(r.identity_holds && r.agrees);
        assert_eq!(r.classical_verdict, Verdict::Stable);
    }

    #[test]
    fn damped_rotation() {
        let th = 1.1f64;
        let m = Matrix::from_rows(&[[th.cos(), -th.sin()], [th.sin(), th.cos()]])
            .unwrap()
            .scale(0.9);
        let r = floquet_check_matrix(&m, 2).unwrap();
        assert!((r.rho_lifted - 0.81).abs() < 1e-12);
        assert!(r.identity_holds);
    }

    #[test]
    fn periodic_system() {
        let sys = SwitchedSystem::continuous(vec![
            Matrix::from_rows(&[[-0.4, 0.2], [-0.2, -1.1]]).unwrap(),
            Matrix::from_rows(&[[-0.4, 0.2], [-0.1, 0.5]]).unwrap(),
        ])
        .unwrap();
        for (h1, h2) in [(1.0, 0.5), (0.2, 3.0)] {
            let c = Cycle::new(vec![Segment::new(1, h1), Segment::new(2, h2)]).unwrap();
            let model = PeriodicModel::new(TimeKind::Continuous, c).unwrap();
            for m in 1..=4 {
                let r = floquet_check(&sys, &model, m).unwrap();
                assert!(r.identity_holds, "{r:?}");
                assert!(r.agrees);
            }
        }
    }
}
