use rayon::prelude::*;

use super::decision::Verdict;
use super::expectation::expected_lift_analytic;
use crate::error::{Error, Result};
use crate::linalg::spectral_radius;
use crate::regen::{MaintenanceModel, SwitchedSystem};

/// Bisection stops once `|ρ(θ) - 1|` falls below this.
pub const THRESHOLD_TOL: f64 = 1e-6;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub rho: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// First crossing of ρ = 1 on the grid, refined by bisection. `None`
    /// when ρ - 1 does not change sign on the grid.
    pub threshold: Option<f64>,
}

/// Tabulates ρ(θ) on `steps` uniformly spaced points of `[lo, hi]` and
/// bisects the first bracketed crossing of ρ = 1.
///
/// Assumes ρ is continuous on the bracketing interval.
pub fn threshold_sweep<F>(rho_at: F, lo: f64, hi: f64, steps: usize) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "sweep needs lo < hi and at least 2 steps, got [{lo}, {hi}] with {steps}"
        )));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    let rows = (0..steps)
        .into_par_iter()
        .map(|i| {
            let theta = if i == steps - 1 { hi } else { lo + i as f64 * h };
            let rho = rho_at(theta)?;
            Ok(SweepRow {
                theta,
                rho,
                verdict: Verdict::from_radius(rho),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut threshold = None;
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.rho == 1.0 {
            threshold = Some(a.theta);
            break;
        }
        if (a.rho - 1.0) * (b.rho - 1.0) < 0.0 {
            threshold = Some(bisect(&rho_at, a.theta, a.rho, b.theta)?);
            break;
        }
    }
    if threshold.is_none() {
        if let Some(last) = rows.last().filter(|r| r.rho == 1.0) {
            threshold = Some(last.theta);
        }
    }
    Ok(SweepResult { rows, threshold })
}

fn bisect<F>(rho_at: &F, mut a: f64, rho_a: f64, mut b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let below_at_a = rho_a < 1.0;
    let mut mid = 0.5 * (a + b);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (a + b);
        let r = rho_at(mid)?;
        if (r - 1.0).abs() < THRESHOLD_TOL || b - a <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if (r < 1.0) == below_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(mid)
}

/// ρ(E[M^[m]]) as a function of the maintenance period, all other model
/// parameters held fixed.
pub fn maintenance_rho(
    system: &SwitchedSystem,
    model: &MaintenanceModel,
    m: usize,
    period: f64,
) -> Result<f64> {
    let e = expected_lift_analytic(system, &model.with_period(period)?, m)?;
    Ok(spectral_radius(&e.estimate)?.radius)
}

/// [`threshold_sweep`] over the maintenance period `T`.
pub fn maintenance_period_sweep(
    system: &SwitchedSystem,
    model: &MaintenanceModel,
    m: usize,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<SweepResult> {
    if lo <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "maintenance period must stay positive, sweep starts at {lo}"
        )));
    }
    threshold_sweep(|t| maintenance_rho(system, model, m, t), lo, hi, steps)
}
