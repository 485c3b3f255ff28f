//! Mean stability analysis for linear systems driven by regenerative
//! switching signals.
//!
//! The central object is the expected lifted one-cycle transition matrix
//! `E[M^[m]]`; the switched system `dx/dt = A_{σ(t)} x` is `m`-th mean
//! stable exactly when its spectral radius is below one (for even `m`, or
//! for positive systems). See [`analyzer`] for the engines that estimate it
//! and [`sim`] for the trajectory simulator used to cross-check verdicts.

pub mod analyzer;
pub mod error;
pub mod fixture;
pub mod lift;
pub mod linalg;
pub mod regen;
pub mod sim;

pub use analyzer::{LiftedExpectation, StabilityReport, Verdict};
pub use error::{Error, Result};
pub use lift::{LiftBasis, LiftedMatrix};
pub use linalg::Matrix;
pub use regen::{Cycle, CycleModel, RngSeed, Segment, SwitchedSystem, TimeKind};
