use crate::error::{Error, Result};
use crate::lift::{infinitesimal_lift_in, lift_matrix_in, LiftBasis};
use crate::linalg::{exp, Matrix};
use crate::regen::{Cycle, SwitchedSystem, TimeKind};

/// State transition over one cycle, `x(end) = M x(start)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub matrix: Matrix,
    pub cycle: Cycle,
}

/// `M = e^{A_{s_k} d_k} ⋯ e^{A_{s_1} d_1}` in continuous time, or
/// `A_{s_k}^{d_k} ⋯ A_{s_1}^{d_1}` in discrete time.
pub fn cycle_transition(system: &SwitchedSystem, cycle: &Cycle) -> Result<TransitionMatrix> {
    let mut m = Matrix::identity(system.dim());
    for seg in cycle.segments() {
        let a = system.mode(seg.mode)?;
        let step = match system.time_kind() {
            TimeKind::Continuous => exp(&a.scale(seg.duration))?,
            TimeKind::Discrete => a.pow(integral_steps(seg.duration)?),
        };
        m = &step * &m;
    }
    Ok(TransitionMatrix {
        matrix: m,
        cycle: cycle.clone(),
    })
}

fn integral_steps(d: f64) -> Result<u64> {
    if d.fract() != 0.0 || d < 1.0 {
        return Err(Error::ModelViolation(format!(
            "discrete-time segment duration must be a positive integer, got {d}"
        )));
    }
    Ok(d as u64)
}

/// Per-mode lifted data, computed once and reused for every cycle.
///
/// Continuous time stores the infinitesimal lifts `(A_s)_[m]`, so a
/// segment contributes `exp((A_s)_[m] d)`. Discrete time stores the power
/// lifts `(A_s)^[m]`, so a segment contributes `((A_s)^[m])^d`.
#[derive(Debug, Clone)]
pub struct LiftedModes {
    time_kind: TimeKind,
    basis: LiftBasis,
    lifted: Vec<Matrix>,
}

impl LiftedModes {
    pub fn new(system: &SwitchedSystem, m: usize) -> Result<Self> {
        let basis = LiftBasis::new(system.dim(), m)?;
        let lifted = system
            .modes()
            .map(|(_, a)| {
                Ok(match system.time_kind() {
                    TimeKind::Continuous => infinitesimal_lift_in(&basis, a)?.matrix,
                    TimeKind::Discrete => lift_matrix_in(&basis, a)?.matrix,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            time_kind: system.time_kind(),
            basis,
            lifted,
        })
    }

    pub fn basis(&self) -> &LiftBasis {
        &self.basis
    }

    /// Lifted one-cycle transition `M^[m]`, assembled segment by segment.
    pub fn transition(&self, cycle: &Cycle) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.basis.dim());
        for seg in cycle.segments() {
            let l = seg
                .mode
                .checked_sub(1)
                .and_then(|i| self.lifted.get(i))
                .ok_or(Error::UnknownMode(seg.mode))?;
            let step = match self.time_kind {
                TimeKind::Continuous => exp(&l.scale(seg.duration))?,
                TimeKind::Discrete => l.pow(integral_steps(seg.duration)?),
            };
            acc = &step * &acc;
        }
        Ok(acc)
    }
}
