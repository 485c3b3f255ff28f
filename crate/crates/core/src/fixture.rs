//! Built-in example systems.

use crate::error::Result;
use crate::linalg::Matrix;
use crate::regen::{MaintenanceModel, SwitchedSystem, UniformSwitchModel};

/// Unstable plant `dx/dt = Ax + Bu` with a failure-prone state feedback
/// `u = Kx`. Mode 1 is the closed loop `A + BK`, mode 2 the open loop `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperFixture {
    pub a: Matrix,
    pub b: Matrix,
    pub k: Matrix,
    pub failure_rate: f64,
    pub jitter: f64,
    pub degree: usize,
}

impl Default for PaperFixture {
    fn default() -> Self {
        Self {
            a: Matrix::from_rows(&[[-0.4, 0.2], [-0.1, 0.5]]).expect("2x2"),
            b: Matrix::from_rows(&[[0.0], [1.0]]).expect("2x1"),
            k: Matrix::from_rows(&[[-0.1, -1.6]]).expect("1x2"),
            failure_rate: 1.0,
            jitter: 0.1,
            degree: 2,
        }
    }
}

impl PaperFixture {
    /// `A + BK`, recomputed on every call.
    pub fn closed_loop(&self) -> Matrix {
        &self.a + &(&self.b * &self.k)
    }

    pub fn system(&self) -> SwitchedSystem {
        SwitchedSystem::continuous(vec![self.closed_loop(), self.a.clone()])
            .expect("fixture matrices are valid")
    }

    pub fn model(&self, period: f64) -> Result<MaintenanceModel> {
        MaintenanceModel::new(period, self.jitter, self.failure_rate)
    }
}

/// Two-mode system whose second mode is a rotation generator (not
/// Metzler): `A₁ = ½[[1, 1], [1, 1]]`, `A₂ = [[0, 1], [-1, 0]]`.
pub fn rotation_switch_system() -> SwitchedSystem {
    SwitchedSystem::continuous(vec![
        Matrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).expect("2x2"),
        Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).expect("2x2"),
    ])
    .expect("fixture matrices are valid")
}

/// Cycle length `t + 1`; mode 1 for a time uniform on `[t, t + 1]`, then
/// mode 2.
pub fn rotation_switch_model(t: f64) -> Result<UniformSwitchModel> {
    UniformSwitchModel::unit_window(t)
}
