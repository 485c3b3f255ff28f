use rand::Rng;

use super::expectation::{LiftedExpectation, Method};
use crate::error::{Error, Result};
use crate::linalg::{spectral_radius, Matrix};
use crate::regen::{
    check_assumptions, AssumptionReport, CheckStatus, CycleModel, PositivityAssertion, RngSeed,
    SwitchedSystem,
};

/// Spectral radii within this distance of 1 are treated as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Width of the Monte Carlo perturbation bracket, in standard errors.
pub const MC_SIGMA: f64 = 3.0;

/// Number of random sign patterns used to bracket ρ under MC noise.
pub const MC_SIGN_PATTERNS: usize = 32;

const SIGN_PATTERN_SEED: u64 = 0x5167_4E5E_ED00_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Verdict for an exactly known spectral radius.
    pub fn from_radius(rho: f64) -> Self {
        if !rho.is_finite() || (rho - 1.0).abs() <= BOUNDARY_TOL {
            Verdict::Inconclusive
        } else if rho < 1.0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub rho: f64,
    pub verdict: Verdict,
    /// `rho - 1`.
    pub margin: f64,
    pub method: Method,
    pub degree: usize,
    pub samples: Option<usize>,
    /// Heuristic bracket on ρ under Monte Carlo noise.
    pub rho_interval: Option<(f64, f64)>,
    pub converged: bool,
    pub assumptions: Option<AssumptionReport>,
    /// False when some hypothesis of the characterization failed; the
    /// verdict is then informational only.
    pub within_hypotheses: bool,
    pub notes: Vec<String>,
}

/// Decides Schur stability of `E[M^[m]]`.
///
/// Analytic estimates use ρ directly. Monte Carlo estimates are bracketed by
/// evaluating ρ at `estimate ± 3 SE` for 32 random sign patterns plus the
/// two uniform-sign patterns; the verdict is stable only if the whole
/// bracket lies below 1 and unstable only if it lies above 1.
pub fn decide_stability(
    e: &LiftedExpectation,
    assumptions: Option<&AssumptionReport>,
) -> Result<StabilityReport> {
    e.estimate.ensure_finite("expected lifted transition")?;
    let spec = spectral_radius(&e.estimate)?;
    let rho = spec.radius;
    let mut notes = Vec::new();
    let mut converged = spec.converged;

    let (verdict, rho_interval) = match (&e.method, &e.std_errors) {
        (Method::MonteCarlo, Some(se)) => {
            let (lo, hi, ok) = perturbation_bracket(&e.estimate, se, rho)?;
            converged &= ok;
            let v = if (rho - 1.0).abs() <= BOUNDARY_TOL {
                Verdict::Inconclusive
            } else if hi < 1.0 {
                Verdict::Stable
            } else if lo > 1.0 {
                Verdict::Unstable
            } else {
                notes.push(format!(
                    "Monte Carlo bracket [{lo:.6}, {hi:.6}] contains 1; increase the sample count"
                ));
                Verdict::Inconclusive
            };
            (v, Some((lo, hi)))
        }
        _ => (Verdict::from_radius(rho), None),
    };

    let verdict = if converged {
        verdict
    } else {
        notes.push("eigenvalue iteration did not converge".into());
        Verdict::Inconclusive
    };
    if verdict == Verdict::Inconclusive && (rho - 1.0).abs() <= BOUNDARY_TOL {
        notes.push("spectral radius is on the stability boundary".into());
    }

    let within_hypotheses = assumptions.map(|a| a.all_hold()).unwrap_or(true);
    if let Some(a) = assumptions {
        let failed = a.failed();
        if !failed.is_empty() {
            notes.push(format!(
                "outside theorem hypotheses: {} failed",
                failed.join(", ")
            ));
        }
    }

    Ok(StabilityReport {
        rho,
        verdict,
        margin: rho - 1.0,
        method: e.method,
        degree: e.degree(),
        samples: e.samples,
        rho_interval,
        converged,
        assumptions: assumptions.cloned(),
        within_hypotheses,
        notes,
    })
}

fn perturbation_bracket(estimate: &Matrix, se: &Matrix, rho: f64) -> Result<(f64, f64, bool)> {
    let mut lo = rho;
    let mut hi = rho;
    let mut ok = true;
    let len = estimate.as_slice().len();
    let mut rng = RngSeed::new(SIGN_PATTERN_SEED).rng();
    let mut patterns: Vec<Vec<f64>> = vec![vec![1.0; len], vec![-1.0; len]];
    for _ in 0..MC_SIGN_PATTERNS {
        patterns.push(
            (0..len)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
        );
    }
    for signs in patterns {
        let mut p = estimate.clone();
        for ((v, s), e) in p.as_mut_slice().iter_mut().zip(&signs).zip(se.as_slice()) {
            *v += s * MC_SIGMA * e;
        }
        let r = spectral_radius(&p)?;
        ok &= r.converged;
        lo = lo.min(r.radius);
        hi = hi.max(r.radius);
    }
    Ok((lo, hi, ok))
}

/// Runs the assumption checks and refuses when A1 fails: odd degrees are
/// only meaningful for positive systems. Other failures are returned in the
/// report and annotate the verdict.
pub fn guard_assumptions(
    system: &SwitchedSystem,
    model: &dyn CycleModel,
    m: usize,
    positivity: PositivityAssertion,
) -> Result<AssumptionReport> {
    super::expectation::ensure_same_time_kind(system, model)?;
    let report = check_assumptions(system, model, m, positivity);
    if report.a1.status == CheckStatus::Fail {
        return Err(Error::AssumptionFailed {
            id: "A1",
            detail: report.a1.detail.clone(),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::LiftBasis;
    use crate::regen::{MaintenanceModel, StreamRng, TimeKind};
    use crate::regen::{Cycle, Segment};

    fn exact(m: Matrix) -> LiftedExpectation {
        LiftedExpectation::exact(LiftBasis::new(m.rows(), 1).unwrap(), m)
    }

    #[test]
    fn half_identity_is_stable() {
        let r = decide_stability(&exact(Matrix::identity(3).scale(0.5)), None).unwrap();
        assert_eq!(r.verdict, Verdict::Stable);
        assert!((r.rho - 0.5).abs() < 1e-15);
        assert!((r.margin + 0.5).abs() < 1e-15);
        assert!(r.within_hypotheses);
    }

    #[test]
    fn identity_is_boundary() {
        let r = decide_stability(&exact(Matrix::identity(3)), None).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.margin, 0.0);
        assert!(r.notes.iter().any(|n| n.contains("boundary")));
    }

    #[test]
    fn unstable_matrix() {
        let r = decide_stability(&exact(Matrix::from_diag(&[0.2, -1.3])), None).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
    }

    fn mc(estimate: Matrix, se: f64) -> LiftedExpectation {
        let n = estimate.rows();
        LiftedExpectation {
            basis: LiftBasis::new(n, 1).unwrap(),
            estimate,
            method: Method::MonteCarlo,
            samples: Some(100),
            std_errors: Some(Matrix::from_row_major(n, n, vec![se; n * n]).unwrap()),
        }
    }

    #[test]
    fn mc_bracket_widens_verdict() {
        let tight = decide_stability(&mc(Matrix::identity(2).scale(0.9), 1e-4), None).unwrap();
        assert_eq!(tight.verdict, Verdict::Stable);
        let (lo, hi) = tight.rho_interval.unwrap();
        assert!(lo <= tight.rho && tight.rho <= hi && hi < 1.0);

        let loose = decide_stability(&mc(Matrix::identity(2).scale(0.95), 0.05), None).unwrap();
        assert_eq!(loose.verdict, Verdict::Inconclusive);

        let above = decide_stability(&mc(Matrix::identity(2).scale(1.2), 1e-3), None).unwrap();
        assert_eq!(above.verdict, Verdict::Unstable);
    }

    #[test]
    fn failed_hypotheses_annotate() {
        struct Unbounded;
        impl CycleModel for Unbounded {
            fn time_kind(&self) -> TimeKind {
                TimeKind::Continuous
            }
            fn max_length(&self) -> Option<f64> {
                None
            }
            fn draw(&self, _: &mut StreamRng) -> Cycle {
                Cycle::new(vec![Segment::new(1, 1.0)]).unwrap()
            }
        }
        let sys = SwitchedSystem::continuous(vec![Matrix::identity(2).scale(-1.0)]).unwrap();
        let a = guard_assumptions(&sys, &Unbounded, 2, PositivityAssertion::None).unwrap();
        let r = decide_stability(&exact(Matrix::identity(2).scale(0.5)), Some(&a)).unwrap();
        assert!(!r.within_hypotheses);
        assert!(r.notes.iter().any(|n| n.contains("A2")));
    }

    #[test]
    fn odd_degree_refused_without_positivity() {
        let sys = SwitchedSystem::continuous(vec![
            Matrix::from_rows(&[[-0.4, 0.2], [-0.2, -1.1]]).unwrap(),
            Matrix::from_rows(&[[-0.4, 0.2], [-0.1, 0.5]]).unwrap(),
        ])
        .unwrap();
        let model = MaintenanceModel::new(1.0, 0.1, 1.0).unwrap();
        let err = guard_assumptions(&sys, &model, 3, PositivityAssertion::MetzlerCheck).unwrap_err();
        assert!(matches!(err, Error::AssumptionFailed { id: "A1", .. }));
        assert!(guard_assumptions(&sys, &model, 3, PositivityAssertion::UserAsserted).is_ok());
        assert!(guard_assumptions(&sys, &model, 2, PositivityAssertion::None).is_ok());
    }
}
