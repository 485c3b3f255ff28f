//! Sample paths of `‖x(t)‖^m` under regenerative switching.
//!
//! Dynamics are piecewise constant, so each segment is propagated exactly
//! with matrix exponentials: the first grid time inside a segment is reached
//! by one exponential from the segment start, later grid times in the same
//! segment by a cached `e^{A k dt}` applied to that first state, and the
//! segment end by one exponential from the segment start.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{exp, Matrix};
use crate::regen::{sample_cycle, CycleModel, RngSeed, SwitchedSystem, TimeKind};

/// States with a norm beyond this are treated as divergent.
pub const DIVERGENCE_NORM: f64 = 1e300;

/// Paths per reduction chunk in [`ensemble_mean`].
pub const PATH_CHUNK: usize = 64;

/// Most paths kept verbatim in an [`EnsembleSummary`].
pub const STORED_PATHS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub path_id: u64,
    pub seed: RngSeed,
    /// Grid times; shorter than the full grid if the path diverged.
    pub times: Vec<f64>,
    /// `‖x(t_j)‖^m`.
    pub values: Vec<f64>,
    pub diverged: bool,
    /// Smallest state entry seen at grid times and segment boundaries.
    pub min_state_entry: f64,
}

/// Simulation settings shared by every path of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub x0: Vec<f64>,
    pub horizon: f64,
    /// Grid step; discrete-time systems always record every step.
    pub dt: f64,
    pub m: usize,
}

impl PathSpec {
    fn validate(&self, system: &SwitchedSystem) -> Result<()> {
        if self.x0.len() != system.dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, system dimension is {}",
                self.x0.len(),
                system.dim()
            )));
        }
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("initial state".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        Ok(())
    }

    fn grid(&self, kind: TimeKind) -> Vec<f64> {
        let step = match kind {
            TimeKind::Continuous => self.dt,
            TimeKind::Discrete => 1.0,
        };
        let count = (self.horizon / step + 1e-9).floor() as usize;
        (0..=count).map(|j| j as f64 * step).collect()
    }
}

/// Per-mode cache of `e^{A k dt}`.
struct StepTables {
    tables: Vec<Vec<Matrix>>,
}

impl StepTables {
    fn new(system: &SwitchedSystem, model: &dyn CycleModel, dt: f64) -> Result<Self> {
        let len = match (system.time_kind(), model.max_length()) {
            (TimeKind::Continuous, Some(r)) if r.is_finite() => (r / dt).ceil() as usize + 2,
            _ => 0,
        };
        let tables = system
            .modes()
            .map(|(_, a)| {
                (0..len)
                    .map(|k| exp(&a.scale(k as f64 * dt)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tables })
    }

    fn get(&self, system: &SwitchedSystem, mode: usize, k: usize, dt: f64) -> Result<Matrix> {
        match self.tables.get(mode - 1).and_then(|t| t.get(k)) {
            Some(e) => Ok(e.clone()),
            None => exp(&system.mode(mode)?.scale(k as f64 * dt)),
        }
    }
}

struct PathState {
    times: Vec<f64>,
    values: Vec<f64>,
    min_entry: f64,
    diverged: bool,
    m: i32,
}

impl PathState {
    /// Records a grid value; returns false once the path has diverged.
    fn record(&mut self, t: f64, x: &[f64]) -> bool {
        if !self.observe(x) {
            return false;
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let value = norm.powi(self.m);
        if !value.is_finite() {
            self.diverged = true;
            return false;
        }
        self.times.push(t);
        self.values.push(value);
        true
    }

    /// Tracks a state that is not on the grid.
    fn observe(&mut self, x: &[f64]) -> bool {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            self.diverged = true;
            return false;
        }
        self.min_entry = x.iter().copied().fold(self.min_entry, f64::min);
        true
    }
}

pub fn simulate_path(
    system: &SwitchedSystem,
    model: &dyn CycleModel,
    spec: &PathSpec,
    seed: RngSeed,
) -> Result<TrajectoryRecord> {
    spec.validate(system)?;
    crate::analyzer::guard_time_kind(system, model)?;
    let tables = StepTables::new(system, model, spec.dt)?;
    run_path(system, model, spec, &tables, seed, 0)
}

fn run_path(
    system: &SwitchedSystem,
    model: &dyn CycleModel,
    spec: &PathSpec,
    tables: &StepTables,
    seed: RngSeed,
    path_id: u64,
) -> Result<TrajectoryRecord> {
    let grid = spec.grid(system.time_kind());
    let mut rng = seed.rng();
    let mut st = PathState {
        times: Vec::with_capacity(grid.len()),
        values: Vec::with_capacity(grid.len()),
        min_entry: f64::INFINITY,
        diverged: false,
        m: spec.m as i32,
    };
    let mut x = spec.x0.clone();
    let mut j = 0usize;

    match system.time_kind() {
        TimeKind::Continuous => {
            let mut start = 0.0;
            'cycles: while j < grid.len() {
                let cycle = sample_cycle(model, &mut rng)?;
                for seg in cycle.segments() {
                    let a = system.mode(seg.mode)?;
                    let end = start + seg.duration;
                    let mut anchor: Option<(usize, Vec<f64>)> = None;
                    while j < grid.len() && grid[j] < end {
                        let y = match &anchor {
                            None => {
                                let y = exp(&a.scale(grid[j] - start))?.mul_vec(&x);
                                anchor = Some((j, y.clone()));
                                y
                            }
                            Some((j0, y0)) => {
                                tables.get(system, seg.mode, j - j0, spec.dt)?.mul_vec(y0)
                            }
                        };
                        if !st.record(grid[j], &y) {
                            break 'cycles;
                        }
                        j += 1;
                    }
                    x = exp(&a.scale(seg.duration))?.mul_vec(&x);
                    start = end;
                    if !st.observe(&x) {
                        break 'cycles;
                    }
                }
            }
        }
        TimeKind::Discrete => {
            let mut k = 0usize;
            if st.record(0.0, &x) {
                j = 1;
                'dcycles: while j < grid.len() {
                    let cycle = sample_cycle(model, &mut rng)?;
                    for seg in cycle.segments() {
                        let a = system.mode(seg.mode)?;
                        for _ in 0..seg.duration as u64 {
                            x = a.mul_vec(&x);
                            k += 1;
                            let ok = if k < grid.len() {
                                j = k + 1;
                                st.record(grid[k], &x)
                            } else {
                                st.observe(&x)
                            };
                            if !ok {
                                break 'dcycles;
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(TrajectoryRecord {
        path_id,
        seed,
        times: st.times,
        values: st.values,
        diverged: st.diverged,
        min_state_entry: st.min_entry,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    /// Mean of `‖x(t)‖^m` over the paths still alive at each grid time.
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Alive paths contributing at each grid time.
    pub counts: Vec<usize>,
    pub paths: usize,
    pub diverged_paths: usize,
    /// Decay rate: minus the least-squares slope of `ln(mean)` against `t`
    /// over `[horizon/2, horizon]`. Positive means decay.
    pub beta_hat: Option<f64>,
    pub min_state_entry: f64,
    /// The first [`STORED_PATHS`] paths.
    pub stored: Vec<TrajectoryRecord>,
}

impl EnsembleSummary {
    pub fn all_diverged(&self) -> bool {
        self.diverged_paths == self.paths
    }

    /// Empirical stability indicator: any divergence or a non-positive
    /// decay rate counts as instability.
    pub fn indicates_stable(&self) -> Option<bool> {
        if self.diverged_paths > 0 {
            return Some(false);
        }
        self.beta_hat.map(|b| b > 0.0)
    }
}

#[derive(Clone)]
struct GridMoments {
    count: Vec<usize>,
    mean: Vec<f64>,
    m2: Vec<f64>,
    diverged: usize,
    min_entry: f64,
}

impl GridMoments {
    fn new(len: usize) -> Self {
        Self {
            count: vec![0; len],
            mean: vec![0.0; len],
            m2: vec![0.0; len],
            diverged: 0,
            min_entry: f64::INFINITY,
        }
    }

    fn push(&mut self, rec: &TrajectoryRecord) {
        for (i, &v) in rec.values.iter().enumerate() {
            self.count[i] += 1;
            let n = self.count[i] as f64;
            let d = v - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (v - self.mean[i]);
        }
        self.diverged += rec.diverged as usize;
        self.min_entry = self.min_entry.min(rec.min_state_entry);
    }

    fn merge(&mut self, o: &GridMoments) {
        for i in 0..self.mean.len() {
            let (na, nb) = (self.count[i] as f64, o.count[i] as f64);
            if nb == 0.0 {
                continue;
            }
            if na == 0.0 {
                self.count[i] = o.count[i];
                self.mean[i] = o.mean[i];
                self.m2[i] = o.m2[i];
                continue;
            }
            let n = na + nb;
            let d = o.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += o.m2[i] + d * d * na * nb / n;
            self.count[i] += o.count[i];
        }
        self.diverged += o.diverged;
        self.min_entry = self.min_entry.min(o.min_entry);
    }
}

/// Averages `paths` independent sample paths. Path `p` draws from
/// `seed.substream(p)`; paths are reduced in fixed chunks merged in index
/// order, so the summary does not depend on the rayon pool size.
pub fn ensemble_mean(
    system: &SwitchedSystem,
    model: &dyn CycleModel,
    spec: &PathSpec,
    paths: usize,
    seed: RngSeed,
) -> Result<EnsembleSummary> {
    if paths < 2 {
        return Err(Error::InvalidParameter(format!(
            "ensemble needs at least 2 paths, got {paths}"
        )));
    }
    spec.validate(system)?;
    crate::analyzer::guard_time_kind(system, model)?;
    let tables = StepTables::new(system, model, spec.dt)?;
    let grid = spec.grid(system.time_kind());
    let chunks = paths.div_ceil(PATH_CHUNK);

    let partials: Vec<Result<(GridMoments, Vec<TrajectoryRecord>)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = GridMoments::new(grid.len());
            let mut kept = Vec::new();
            for p in c * PATH_CHUNK..((c + 1) * PATH_CHUNK).min(paths) {
                let rec = run_path(
                    system,
                    model,
                    spec,
                    &tables,
                    seed.substream(p as u64),
                    p as u64,
                )?;
                acc.push(&rec);
                if p < STORED_PATHS {
                    kept.push(rec);
                }
            }
            Ok((acc, kept))
        })
        .collect();

    let mut total = GridMoments::new(grid.len());
    let mut stored = Vec::new();
    for part in partials {
        let (acc, kept) = part?;
        total.merge(&acc);
        stored.extend(kept);
    }

    let std_error = total
        .m2
        .iter()
        .zip(&total.count)
        .map(|(&m2, &n)| {
            if n >= 2 {
                (m2.max(0.0) / (n as f64 - 1.0) / n as f64).sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();
    let beta_hat = fit_decay(&grid, &total.mean, &total.count, spec.horizon);

    Ok(EnsembleSummary {
        times: grid,
        mean: total.mean,
        std_error,
        counts: total.count,
        paths,
        diverged_paths: total.diverged,
        beta_hat,
        min_state_entry: total.min_entry,
        stored,
    })
}

fn fit_decay(times: &[f64], mean: &[f64], counts: &[usize], horizon: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(mean)
        .zip(counts)
        .filter(|((&t, &v), &c)| t >= horizon / 2.0 && c > 0 && v > 0.0 && v.is_finite())
        .map(|((&t, &v), _)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}
