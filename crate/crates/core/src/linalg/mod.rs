//! Dense numerical kernels.

mod eigen;
mod expm;
mod matrix;

pub use eigen::{eigenvalues, spectral_radius, SpectralResult, DEFLATION_TOL};
pub use expm::{exp, expm, expm_convolution, expm_integral};
pub use matrix::Matrix;
