//! Mean stability decisions from the expected lifted one-cycle transition.
//!
//! The system is `m`-th mean stable exactly when `E[M^[m]]` is Schur
//! stable, where `M` is the state transition over one regenerative cycle.
//! This module builds `M`, estimates `E[M^[m]]` (closed form for the
//! maintenance model, Monte Carlo otherwise) and turns its spectral radius
//! into a verdict.

mod decision;
mod expectation;
mod floquet;
mod sweep;
mod transition;

pub use decision::{
    decide_stability, guard_assumptions, StabilityReport, Verdict, BOUNDARY_TOL, MC_SIGMA,
    MC_SIGN_PATTERNS,
};
pub use expectation::{
    expected_lift_analytic, expected_lift_enumerated, expected_lift_mc, LiftedExpectation, Method, MC_CHUNK,
};
pub use floquet::{floquet_check, floquet_check_matrix, FloquetReport, FLOQUET_TOL};
pub use sweep::{
    maintenance_period_sweep, maintenance_rho, threshold_sweep, SweepResult, SweepRow,
    THRESHOLD_TOL,
};
pub use transition::{cycle_transition, LiftedModes, TransitionMatrix};

pub(crate) use expectation::ensure_same_time_kind as guard_time_kind;
