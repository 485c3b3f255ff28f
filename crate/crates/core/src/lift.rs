//! Degree-m lifts of vectors and matrices.
//!
//! The lift of `x ∈ ℝⁿ` is the vector of weighted monomials `√(α!) x^α`
//! over all exponent tuples `α` with `|α| = m`, where
//! `α! = m! / (α₁! ⋯ αₙ!)`. The weights make `‖x^[m]‖ = ‖x‖^m`.
//!
//! Basis order is lexicographic *descending* on exponent tuples, so for
//! `n = 2, m = 2` the basis is `(x₁², √2 x₁x₂, x₂²)`.
//!
//! Two matrix lifts are provided:
//! * [`lift_matrix`]: `A^[m]` with `(Ax)^[m] = A^[m] x^[m]`;
//! * [`infinitesimal_lift`]: `A_[m]` with `d/dt x^[m] = A_[m] x^[m]` along
//!   `dx/dt = Ax`, so that `exp(A_[m] t) = (exp(A t))^[m]`.
//!
//! Both are built by exact expansion of the monomials, not by fitting.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Highest supported lift degree.
pub const MAX_DEGREE: usize = 8;

/// Exponent tuple `α` with `Σ αᵢ = m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// Compact label such as `2|0|1`, used in serialized output.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// `C(n + m - 1, m)`, the number of degree-m monomials in n variables.
pub fn lift_dimension(n: usize, m: usize) -> Result<usize> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "lift needs n >= 1 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    // C(n+m-1, m) = Π_{k=1..m} (n-1+k)/k, exact at every step.
    let mut acc: u128 = 1;
    for k in 1..=m as u128 {
        acc = acc
            .checked_mul(n as u128 - 1 + k)
            .ok_or(Error::DimensionTooLarge { n, m })?
            / k;
    }
    usize::try_from(acc).map_err(|_| Error::DimensionTooLarge { n, m })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Ordered monomial basis for a fixed `(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftBasis {
    n: usize,
    m: usize,
    indices: Vec<MultiIndex>,
    coeffs: Vec<f64>,
    position: HashMap<MultiIndex, usize>,
}

impl LiftBasis {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(m));
        }
        let dim = lift_dimension(n, m)?;
        let mut indices = Vec::with_capacity(dim);
        let mut current = vec![0u8; n];
        enumerate_desc(&mut current, 0, m, &mut indices);
        debug_assert_eq!(indices.len(), dim);

        let mf = factorial(m);
        let coeffs = indices
            .iter()
            .map(|a| {
                let denom: f64 = a.0.iter().map(|&x| factorial(x as usize)).product();
                (mf / denom).sqrt()
            })
            .collect();
        let position = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(Self {
            n,
            m,
            indices,
            coeffs,
            position,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// `√(α!)` for every basis index, in basis order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    pub fn lift_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, basis expects {}",
                x.len(),
                self.n
            )));
        }
        Ok(self
            .indices
            .iter()
            .zip(&self.coeffs)
            .map(|(a, &w)| {
                w * a
                    .0
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .collect())
    }
}

/// All tuples of length `n` summing to `remaining`, lexicographically
/// descending.
fn enumerate_desc(current: &mut [u8], pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    let n = current.len();
    if pos == n - 1 {
        current[pos] = remaining as u8;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v as u8;
        enumerate_desc(current, pos + 1, remaining - v, out);
    }
    current[pos] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    /// `A^[m]`, the lift of a linear map.
    Power,
    /// `A_[m]`, the lift of a linear vector field.
    Infinitesimal,
}

/// An `n_m × n_m` lifted matrix together with the basis it is expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatrix {
    pub basis: LiftBasis,
    pub matrix: Matrix,
    pub kind: LiftKind,
}

impl LiftedMatrix {
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

pub fn lift_vector(x: &[f64], m: usize) -> Result<Vec<f64>> {
    LiftBasis::new(x.len(), m)?.lift_vector(x)
}

/// Sparse polynomial in n variables keyed by exponent tuple.
type Poly = HashMap<Vec<u8>, f64>;

fn mul_linear(p: &Poly, row: &[f64]) -> Poly {
    let mut out = Poly::with_capacity(p.len() * row.len());
    for (mono, &c) in p {
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let mut e = mono.clone();
            e[j] += 1;
            *out.entry(e).or_insert(0.0) += c * a;
        }
    }
    out
}

/// `A^[m]`, by expanding `w_α Π_i (Σ_j A_ij x_j)^{α_i}` in the monomial
/// basis and rescaling each coefficient by `1 / w_β`.
pub fn lift_matrix_in(basis: &LiftBasis, a: &Matrix) -> Result<LiftedMatrix> {
    check_generator(basis, a)?;
    let n = basis.n();
    let dim = basis.dim();
    let mut out = Matrix::zeros(dim, dim);
    for (row, alpha) in basis.indices().iter().enumerate() {
        let mut poly: Poly = HashMap::new();
        poly.insert(vec![0u8; n], 1.0);
        for (i, &ai) in alpha.exponents().iter().enumerate() {
            for _ in 0..ai {
                poly = mul_linear(&poly, a.row(i));
            }
        }
        let w_row = basis.coeffs()[row];
        for (mono, c) in poly {
            let col = basis
                .position(&MultiIndex(mono))
                .expect("expanded monomial has degree m");
            out[(row, col)] += w_row * c / basis.coeffs()[col];
        }
    }
    Ok(LiftedMatrix {
        basis: basis.clone(),
        matrix: out,
        kind: LiftKind::Power,
    })
}

pub fn lift_matrix(a: &Matrix, m: usize) -> Result<LiftedMatrix> {
    a.ensure_square("lifted matrix")?;
    lift_matrix_in(&LiftBasis::new(a.rows(), m)?, a)
}

/// `A_[m]` by the product rule:
/// `d/dt x^α = Σ_p α_p x^{α - e_p} Σ_q A_pq x_q`.
pub fn infinitesimal_lift_in(basis: &LiftBasis, a: &Matrix) -> Result<LiftedMatrix> {
    check_generator(basis, a)?;
    let n = basis.n();
    let dim = basis.dim();
    let mut out = Matrix::zeros(dim, dim);
    for (row, alpha) in basis.indices().iter().enumerate() {
        let w_row = basis.coeffs()[row];
        for p in 0..n {
            let ap = alpha.exponents()[p];
            if ap == 0 {
                continue;
            }
            for q in 0..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let mut beta = alpha.exponents().to_vec();
                beta[p] -= 1;
                beta[q] += 1;
                let col = basis
                    .position(&MultiIndex(beta))
                    .expect("shifted monomial has degree m");
                out[(row, col)] += w_row * ap as f64 * apq / basis.coeffs()[col];
            }
        }
    }
    Ok(LiftedMatrix {
        basis: basis.clone(),
        matrix: out,
        kind: LiftKind::Infinitesimal,
    })
}

pub fn infinitesimal_lift(a: &Matrix, m: usize) -> Result<LiftedMatrix> {
    a.ensure_square("lifted generator")?;
    infinitesimal_lift_in(&LiftBasis::new(a.rows(), m)?, a)
}

fn check_generator(basis: &LiftBasis, a: &Matrix) -> Result<()> {
    a.ensure_square("lifted matrix")?;
    a.ensure_finite("lifted matrix")?;
    if a.rows() != basis.n() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, basis has n = {}",
            a.rows(),
            a.cols(),
            basis.n()
        )));
    }
    Ok(())
}
