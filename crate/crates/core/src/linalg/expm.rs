//! Matrix exponential and exponential integrals.
//!
//! `exp` is the scaling-and-squaring method with a degree-13 Padé
//! approximant. Integrals of `e^{Ft}` are read off the upper-right block of
//! the exponential of an augmented block-triangular matrix:
//!
//! ```text
//! exp([[F1, I], [0, F2]] t) = [[e^{F1 t}, ∫_0^t e^{(t-τ)F1} e^{τF2} dτ], [0, e^{F2 t}]]
//! ```
//!
//! With `F2 = 0` the upper-right block is `∫_0^t e^{F1 τ} dτ`.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled Padé-13 approximant is accurate
/// to double precision.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential `e^{A}`.
pub fn exp(a: &Matrix) -> Result<Matrix> {
    a.ensure_square("exponent")?;
    a.ensure_finite("exponent")?;
    let n = a.rows();
    let norm = a.norm1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = if s > 0 { a.scale(0.5f64.powi(s)) } else { a.clone() };

    let b = &PADE13;
    let ident = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Matrix {
        let mut m = a6.scale(c6);
        m = &m + &a4.scale(c4);
        m = &m + &a2.scale(c2);
        m.shift_diag(c0)
    };

    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);
    debug_assert_eq!(ident.rows(), n);

    let mut r = (&v - &u).solve(&(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::NonFinite("matrix exponential overflowed".into()));
    }
    Ok(r)
}

/// `e^{A t}` for `t >= 0`.
pub fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    exp(&a.scale(t))
}

/// Upper-right block of `exp([[F1, I], [0, F2]] t)`.
fn augmented_upper_right(f1: &Matrix, f2: &Matrix, t: f64) -> Result<Matrix> {
    let n = f1.rows();
    let mut big = Matrix::zeros(2 * n, 2 * n);
    big.set_block(0, 0, &f1.scale(t));
    big.set_block(0, n, &Matrix::identity(n).scale(t));
    big.set_block(n, n, &f2.scale(t));
    Ok(exp(&big)?.block(0, n, n, n))
}

/// `∫_a^b e^{F t} dt`, evaluated as `e^{F a} ∫_0^{b-a} e^{F τ} dτ`.
pub fn expm_integral(f: &Matrix, a: f64, b: f64) -> Result<Matrix> {
    f.ensure_square("integrand generator")?;
    f.ensure_finite("integrand generator")?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    let n = f.rows();
    let width = b - a;
    let psi = if width == 0.0 {
        Matrix::zeros(n, n)
    } else {
        augmented_upper_right(f, &Matrix::zeros(n, n), width)?
    };
    if a == 0.0 {
        Ok(psi)
    } else {
        Ok(&exp(&f.scale(a))? * &psi)
    }
}

/// `∫_0^t e^{(t-τ) F1} e^{τ F2} dτ`.
pub fn expm_convolution(f1: &Matrix, f2: &Matrix, t: f64) -> Result<Matrix> {
    f1.ensure_square("F1")?;
    f2.ensure_square("F2")?;
    if f1.rows() != f2.rows() {
        return Err(Error::DimensionMismatch(format!(
            "F1 is {}x{} but F2 is {}x{}",
            f1.rows(),
            f1.cols(),
            f2.rows(),
            f2.cols()
        )));
    }
    f1.ensure_finite("F1")?;
    f2.ensure_finite("F2")?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(Matrix::zeros(f1.rows(), f1.rows()));
    }
    augmented_upper_right(f1, f2, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..n * n).map(|_| rng.random_range(-scale..scale)).collect();
        Matrix::from_row_major(n, n, data).unwrap()
    }

    /// Truncated Taylor series with many terms; only used on small norms.
    fn taylor_exp(a: &Matrix) -> Matrix {
        let n = a.rows();
        let mut term = Matrix::identity(n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = (&term * a).scale(1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    /// Composite Simpson rule on a matrix-valued integrand.
    fn simpson<F: Fn(f64) -> Matrix>(f: F, a: f64, b: f64, panels: usize) -> Matrix {
        let h = (b - a) / panels as f64;
        let mut acc = &f(a) + &f(b);
        for k in 1..panels {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc = &acc + &f(a + k as f64 * h).scale(w);
        }
        acc.scale(h / 3.0)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = Matrix::zeros(3, 3);
        assert_eq!(expm(&z, 7.5).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn exp_of_diagonal() {
        let a = Matrix::from_diag(&[0.3, -1.7]);
        let t = 2.5;
        let e = expm(&a, t).unwrap();
        assert!((e[(0, 0)] - (0.3f64 * t).exp()).abs() < 1e-12 * (0.3f64 * t).exp());
        assert!((e[(1, 1)] - (-1.7f64 * t).exp()).abs() < 1e-12);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn rotation_by_pi() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let e = expm(&a, PI).unwrap();
        assert!(e.max_abs_diff(&Matrix::identity(2).scale(-1.0)) < 1e-10);
    }

    #[test]
    fn matches_taylor_on_small_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random(4, 0.5, &mut rng);
            let e = exp(&a).unwrap();
            assert!(e.max_abs_diff(&taylor_exp(&a)) < 1e-13);
        }
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let a = random(3, 1.0, &mut rng);
            let (s, t) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
            let lhs = expm(&a, s + t).unwrap();
            let rhs = &expm(&a, s).unwrap() * &expm(&a, t).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-9 * lhs.max_abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = Matrix::from_rows(&[[f64::NAN, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(exp(&a), Err(Error::NonFinite(_))));
        let r = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(exp(&r), Err(Error::DimensionMismatch(_))));
        assert!(expm(&Matrix::identity(2), -1.0).is_err());
    }

    #[test]
    fn integral_of_zero_generator() {
        let z = Matrix::zeros(2, 2);
        let got = expm_integral(&z, 0.4, 1.9).unwrap();
        assert!(got.max_abs_diff(&Matrix::identity(2).scale(1.5)) < 1e-14);
    }

    #[test]
    fn integral_of_diagonal() {
        let f = [0.7, -2.0, 1e-9];
        let t = 1.3;
        let got = expm_integral(&Matrix::from_diag(&f), 0.0, t).unwrap();
        for (i, &fi) in f.iter().enumerate() {
            let want = (fi * t).exp_m1() / fi;
            assert!((got[(i, i)] - want).abs() < 1e-12 * want.abs(), "{i}");
        }
    }

    #[test]
    fn integral_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let f = random(3, 1.0, &mut rng);
            let got = expm_integral(&f, 0.5, 2.0).unwrap();
            let want = simpson(|t| taylor_exp(&f.scale(t)), 0.5, 2.0, 400);
            assert!(got.max_abs_diff(&want) < 1e-8, "{}", got.max_abs_diff(&want));
        }
    }

    #[test]
    fn integral_derivative_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = random(3, 1.0, &mut rng);
        let (t, h) = (1.1, 1e-4);
        let d = (&expm_integral(&f, 0.0, t + h).unwrap() - &expm_integral(&f, 0.0, t - h).unwrap())
            .scale(0.5 / h);
        let e = expm(&f, t).unwrap();
        assert!(d.max_abs_diff(&e) < 1e-6 * e.max_abs());
    }

    #[test]
    fn integral_rejects_reversed_bounds() {
        assert!(expm_integral(&Matrix::identity(2), 2.0, 1.0).is_err());
    }

    #[test]
    fn convolution_trivial_cases() {
        let z = Matrix::zeros(2, 2);
        let got = expm_convolution(&z, &z, 0.8).unwrap();
        assert!(got.max_abs_diff(&Matrix::identity(2).scale(0.8)) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = random(3, 1.0, &mut rng);
        let t = 1.7;
        let got = expm_convolution(&f, &f, t).unwrap();
        let want = expm(&f, t).unwrap().scale(t);
        assert!(got.max_abs_diff(&want) < 1e-10 * want.max_abs());
    }

    #[test]
    fn convolution_commuting_diagonals() {
        let (f1, f2) = ([0.4, -1.3, 2.0], [-0.6, 0.9, 2.0 + 1e-3]);
        let t = 1.4;
        let got = expm_convolution(&Matrix::from_diag(&f1), &Matrix::from_diag(&f2), t).unwrap();
        for i in 0..3 {
            let want = ((f1[i] * t).exp() - (f2[i] * t).exp()) / (f1[i] - f2[i]);
            assert!((got[(i, i)] - want).abs() < 1e-10 * want.abs().max(1.0));
        }
    }

    #[test]
    fn convolution_matches_simpson() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..4 {
            let f1 = random(4, 1.0, &mut rng);
            let f2 = random(4, 1.0, &mut rng);
            let t = 1.5;
            let got = expm_convolution(&f1, &f2, t).unwrap();
            let want = simpson(
                |tau| &taylor_exp(&f1.scale(t - tau)) * &taylor_exp(&f2.scale(tau)),
                0.0,
                t,
                600,
            );
            assert!(got.max_abs_diff(&want) < 1e-7, "{}", got.max_abs_diff(&want));
        }
    }

    #[test]
    fn convolution_dimension_mismatch() {
        let err = expm_convolution(&Matrix::identity(2), &Matrix::identity(3), 1.0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
