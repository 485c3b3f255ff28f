//! Switched systems and regenerative switching signals.
//!
//! A switching signal is described cycle by cycle: a [`CycleModel`] draws
//! i.i.d. [`Cycle`]s, each a finite list of constant-mode segments. The
//! signal is taken right-continuous, so the mode at a renewal instant is the
//! first mode of the new cycle.

mod assumptions;
mod models;
mod rng;

pub use assumptions::{
    check_assumptions, AssumptionCheck, AssumptionReport, CheckStatus, PositivityAssertion,
};
pub use models::{
    DiscreteMaintenanceModel, FiniteSupportModel, MaintenanceModel, PeriodicModel,
    UniformSwitchModel,
};
pub use rng::{RngSeed, StreamRng};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKind {
    Continuous,
    Discrete,
}

impl TimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeKind::Continuous => "continuous",
            TimeKind::Discrete => "discrete",
        }
    }
}

/// Family of mode matrices `A_s`, with modes labelled `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedSystem {
    time_kind: TimeKind,
    matrices: Vec<Matrix>,
}

impl SwitchedSystem {
    pub fn new(time_kind: TimeKind, matrices: Vec<Matrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidParameter("system needs at least one mode".into()))?;
        let n = first.rows();
        for (i, a) in matrices.iter().enumerate() {
            a.ensure_square(&format!("mode {}", i + 1))?;
            a.ensure_finite(&format!("mode {}", i + 1))?;
            if a.rows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "mode {} is {}x{}, mode 1 is {n}x{n}",
                    i + 1,
                    a.rows(),
                    a.cols()
                )));
            }
        }
        Ok(Self {
            time_kind,
            matrices,
        })
    }

    pub fn continuous(matrices: Vec<Matrix>) -> Result<Self> {
        Self::new(TimeKind::Continuous, matrices)
    }

    pub fn discrete(matrices: Vec<Matrix>) -> Result<Self> {
        Self::new(TimeKind::Discrete, matrices)
    }

    pub fn time_kind(&self) -> TimeKind {
        self.time_kind
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn mode_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn mode(&self, label: usize) -> Result<&Matrix> {
        label
            .checked_sub(1)
            .and_then(|i| self.matrices.get(i))
            .ok_or(Error::UnknownMode(label))
    }

    /// `(label, A_label)` pairs in label order.
    pub fn modes(&self) -> impl Iterator<Item = (usize, &Matrix)> {
        self.matrices.iter().enumerate().map(|(i, a)| (i + 1, a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub mode: usize,
    pub duration: f64,
}

impl Segment {
    pub fn new(mode: usize, duration: f64) -> Self {
        Self { mode, duration }
    }
}

/// One regenerative cycle: total length and its constant-mode segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    length: f64,
    segments: Vec<Segment>,
}

impl Cycle {
    /// Builds a cycle whose length is the sum of the segment durations.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let length = segments.iter().map(|s| s.duration).sum();
        Self::with_length(length, segments)
    }

    /// Builds a cycle with an explicit length; the durations must add up to
    /// it within rounding.
    pub fn with_length(length: f64, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::ModelViolation("cycle has no segments".into()));
        }
        for s in &segments {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::ModelViolation(format!(
                    "segment duration must be positive and finite, got {}",
                    s.duration
                )));
            }
            if s.mode == 0 {
                return Err(Error::UnknownMode(0));
            }
        }
        let sum: f64 = segments.iter().map(|s| s.duration).sum();
        if !(length.is_finite() && length > 0.0)
            || (sum - length).abs() > 4.0 * f64::EPSILON * length
        {
            return Err(Error::ModelViolation(format!(
                "segment durations sum to {sum}, cycle length is {length}"
            )));
        }
        Ok(Self { length, segments })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// True when every duration is a positive integer.
    pub fn is_integral(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.duration.fract() == 0.0 && s.duration >= 1.0)
    }

    pub fn has_mode(&self, mode: usize) -> bool {
        self.segments.iter().any(|s| s.mode == mode)
    }
}

/// A distribution over i.i.d. cycles.
pub trait CycleModel: Send + Sync {
    fn time_kind(&self) -> TimeKind;

    /// Essential upper bound on the cycle length, or `None` when the model
    /// does not have one.
    fn max_length(&self) -> Option<f64>;

    /// Draws one cycle. Use [`sample_cycle`] to also enforce the model's
    /// declared contract.
    fn draw(&self, rng: &mut StreamRng) -> Cycle;
}

/// Draws a cycle and checks it against the model's declared bound and time
/// kind.
pub fn sample_cycle(model: &dyn CycleModel, rng: &mut StreamRng) -> Result<Cycle> {
    let cycle = model.draw(rng);
    if let Some(bound) = model.max_length() {
        if cycle.length() > bound {
            return Err(Error::ModelViolation(format!(
                "sampled cycle length {} exceeds declared bound {bound}",
                cycle.length()
            )));
        }
    }
    if model.time_kind() == TimeKind::Discrete && !cycle.is_integral() {
        return Err(Error::ModelViolation(
            "discrete-time cycle has non-integer segment durations".into(),
        ));
    }
    Ok(cycle)
}
