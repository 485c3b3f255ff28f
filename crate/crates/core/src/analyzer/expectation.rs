//! Estimators of the expected lifted one-cycle transition `E[M^[m]]`.

use rayon::prelude::*;

use super::transition::LiftedModes;
use crate::error::{Error, Result};
use crate::lift::{infinitesimal_lift_in, LiftBasis};
use crate::linalg::{exp, expm_integral, Matrix};
use crate::regen::{
    sample_cycle, CycleModel, FiniteSupportModel, MaintenanceModel, RngSeed, SwitchedSystem,
    TimeKind,
};

/// Samples per independent RNG substream. Fixed so that the partition of
/// work, and hence the floating-point reduction order, does not depend on
/// the number of worker threads.
pub const MC_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedExpectation {
    pub basis: LiftBasis,
    pub estimate: Matrix,
    pub method: Method,
    /// Monte Carlo only.
    pub samples: Option<usize>,
    /// Entrywise standard errors, Monte Carlo only.
    pub std_errors: Option<Matrix>,
}

impl LiftedExpectation {
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    /// Wraps an exactly known matrix, e.g. the lift of a deterministic
    /// transition.
    pub fn exact(basis: LiftBasis, estimate: Matrix) -> Self {
        Self {
            basis,
            estimate,
            method: Method::Analytic,
            samples: None,
            std_errors: None,
        }
    }
}

/// Running mean and sum of squared deviations (Welford), entrywise.
#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mu, m2), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *mu;
            *mu += d / n;
            *m2 += d * (v - *mu);
        }
    }

    /// Chan et al. pairwise combination.
    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
    }
}

/// Monte Carlo estimate `(1/N) Σ M_i^[m]` over `samples` i.i.d. cycles.
///
/// Work is split into chunks of [`MC_CHUNK`] samples; chunk `k` draws from
/// `seed.substream(k)` and chunks are merged in index order, so the result
/// is bit-identical for any rayon pool size.
pub fn expected_lift_mc(
    system: &SwitchedSystem,
    model: &dyn CycleModel,
    m: usize,
    samples: usize,
    seed: RngSeed,
) -> Result<LiftedExpectation> {
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo needs at least 2 samples, got {samples}"
        )));
    }
    ensure_same_time_kind(system, model)?;
    let modes = LiftedModes::new(system, m)?;
    let dim = modes.basis().dim();
    let chunks = samples.div_ceil(MC_CHUNK);

    let partials: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.substream(k as u64).rng();
            let count = MC_CHUNK.min(samples - k * MC_CHUNK);
            let mut acc = Moments::new(dim * dim);
            for _ in 0..count {
                let cycle = sample_cycle(model, &mut rng)?;
                acc.push(modes.transition(&cycle)?.as_slice());
            }
            Ok(acc)
        })
        .collect();

    let mut total = Moments::new(dim * dim);
    for p in partials {
        total.merge(&p?);
    }
    let n = total.count as f64;
    let se: Vec<f64> = total
        .m2
        .iter()
        .map(|&m2| (m2.max(0.0) / (n - 1.0) / n).sqrt())
        .collect();
    Ok(LiftedExpectation {
        basis: modes.basis().clone(),
        estimate: Matrix::from_row_major(dim, dim, total.mean)?,
        method: Method::MonteCarlo,
        samples: Some(total.count),
        std_errors: Some(Matrix::from_row_major(dim, dim, se)?),
    })
}

/// Closed form of `E[M^[m]]` for the two-mode maintenance model.
///
/// With `Ā_i = (A_i)_[m]`, failure rate `λ` and cycle length
/// `R ~ U[a, b]`, `a = (1-δ)T`, `b = (1+δ)T`:
///
/// ```text
/// E[M^[m]] = 1/(b-a) ∫_a^b ( λ ∫_0^t e^{Ā₂(t-s)} e^{(Ā₁-λI)s} ds + e^{(Ā₁-λI)t} ) dt
/// ```
///
/// The inner convolution is the upper-right block of
/// `exp([[Ā₂, I], [0, Ā₁-λI]] t)`, so both outer integrals are integrals of
/// matrix exponentials and are evaluated exactly by
/// [`expm_integral`]. For `δ = 0` the outer average collapses to `t = T`.
pub fn expected_lift_analytic(
    system: &SwitchedSystem,
    model: &MaintenanceModel,
    m: usize,
) -> Result<LiftedExpectation> {
    if system.time_kind() != TimeKind::Continuous || system.mode_count() != 2 {
        return Err(Error::InvalidParameter(format!(
            "analytic engine needs a continuous-time system with exactly 2 modes \
             (healthy = 1, failed = 2); got {} time with {} mode(s)",
            system.time_kind().as_str(),
            system.mode_count()
        )));
    }
    let basis = LiftBasis::new(system.dim(), m)?;
    let a1 = infinitesimal_lift_in(&basis, system.mode(1)?)?.matrix;
    let a2 = infinitesimal_lift_in(&basis, system.mode(2)?)?.matrix;
    let lam = model.failure_rate();
    let nm = basis.dim();

    let healthy = a1.shift_diag(-lam);
    let mut block = Matrix::zeros(2 * nm, 2 * nm);
    block.set_block(0, 0, &a2);
    block.set_block(0, nm, &Matrix::identity(nm));
    block.set_block(nm, nm, &healthy);

    let (lo, hi) = model.length_range();
    let estimate = if hi > lo {
        let failed = expm_integral(&block, lo, hi)?.block(0, nm, nm, nm);
        let survived = expm_integral(&healthy, lo, hi)?;
        (&failed.scale(lam) + &survived).scale(1.0 / (hi - lo))
    } else {
        let t = model.period();
        let failed = exp(&block.scale(t))?.block(0, nm, nm, nm);
        let survived = exp(&healthy.scale(t))?;
        &failed.scale(lam) + &survived
    };
    estimate.ensure_finite("analytic expectation")?;
    Ok(LiftedExpectation::exact(basis, estimate))
}

pub(crate) fn ensure_same_time_kind(system: &SwitchedSystem, model: &dyn CycleModel) -> Result<()> {
    if system.time_kind() != model.time_kind() {
        return Err(Error::InvalidParameter(format!(
            "system is {}-time but the cycle model is {}-time",
            system.time_kind().as_str(),
            model.time_kind().as_str()
        )));
    }
    Ok(())
}

/// Exact `Σ p_i M_i^[m]` for a model with finitely many cycles.
pub fn expected_lift_enumerated(
    system: &SwitchedSystem,
    model: &FiniteSupportModel,
    m: usize,
) -> Result<LiftedExpectation> {
    ensure_same_time_kind(system, model)?;
    let modes = LiftedModes::new(system, m)?;
    let dim = modes.basis().dim();
    let mut acc = Matrix::zeros(dim, dim);
    for (p, cycle) in model.outcomes() {
        acc = &acc + &modes.transition(cycle)?.scale(*p);
    }
    Ok(LiftedExpectation::exact(modes.basis().clone(), acc))
}
