use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric};

use super::{Cycle, CycleModel, Segment, StreamRng, TimeKind};
use crate::error::{Error, Result};

/// Healthy/failed switching under jittered periodic maintenance.
///
/// Each cycle starts in mode 1. A failure after an exponential holding
/// time with rate `failure_rate` moves the system to mode 2, where it stays
/// until the next maintenance. Maintenance epochs are spaced
/// `period + Δ`, with `Δ` uniform on `[-jitter * period, jitter * period]`.
/// Repairs are instantaneous and always succeed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaintenanceModel {
    period: f64,
    jitter: f64,
    failure_rate: f64,
}

impl MaintenanceModel {
    pub fn new(period: f64, jitter: f64, failure_rate: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "maintenance period T must be positive, got {period}"
            )));
        }
        if !(jitter.is_finite() && (0.0..1.0).contains(&jitter)) {
            return Err(Error::InvalidParameter(format!(
                "jitter fraction delta must lie in [0, 1), got {jitter}"
            )));
        }
        if !(failure_rate.is_finite() && failure_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "failure rate lambda must be positive, got {failure_rate}"
            )));
        }
        Ok(Self {
            period,
            jitter,
            failure_rate,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn failure_rate(&self) -> f64 {
        self.failure_rate
    }

    pub fn with_period(&self, period: f64) -> Result<Self> {
        Self::new(period, self.jitter, self.failure_rate)
    }

    /// Support `[(1-δ)T, (1+δ)T]` of the cycle length.
    pub fn length_range(&self) -> (f64, f64) {
        (
            (1.0 - self.jitter) * self.period,
            (1.0 + self.jitter) * self.period,
        )
    }

    /// The cycle determined by a jitter draw `Δ` and a failure time.
    pub fn cycle_from_draws(&self, delta: f64, failure_time: f64) -> Cycle {
        let length = self.period + delta;
        let h = failure_time.max(0.0);
        let segments = if h >= length {
            vec![Segment::new(1, length)]
        } else if h == 0.0 {
            vec![Segment::new(2, length)]
        } else {
            vec![Segment::new(1, h), Segment::new(2, length - h)]
        };
        Cycle::with_length(length, segments).expect("maintenance cycle is well formed")
    }
}

impl CycleModel for MaintenanceModel {
    fn time_kind(&self) -> TimeKind {
        TimeKind::Continuous
    }

    fn max_length(&self) -> Option<f64> {
        Some(self.length_range().1)
    }

    fn draw(&self, rng: &mut StreamRng) -> Cycle {
        let half_width = self.jitter * self.period;
        let delta = if half_width > 0.0 {
            rng.random_range(-half_width..=half_width)
        } else {
            0.0
        };
        let failure = Exp::new(self.failure_rate)
            .expect("validated rate")
            .sample(rng);
        self.cycle_from_draws(delta, failure)
    }
}

/// Discrete-time maintenance: integer cycle length uniform on
/// `{T - J, ..., T + J}`, and a failure probability `p` per step while
/// healthy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteMaintenanceModel {
    period: u64,
    jitter: u64,
    failure_prob: f64,
}

impl DiscreteMaintenanceModel {
    pub fn new(period: u64, jitter: u64, failure_prob: f64) -> Result<Self> {
        if period == 0 || jitter >= period {
            return Err(Error::InvalidParameter(format!(
                "need period >= 1 and jitter < period, got T = {period}, J = {jitter}"
            )));
        }
        if !(failure_prob > 0.0 && failure_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "failure probability must lie in (0, 1], got {failure_prob}"
            )));
        }
        Ok(Self {
            period,
            jitter,
            failure_prob,
        })
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn jitter(&self) -> u64 {
        self.jitter
    }

    pub fn failure_prob(&self) -> f64 {
        self.failure_prob
    }

    pub fn cycle_from_draws(&self, length: u64, healthy_steps: u64) -> Cycle {
        let segments = if healthy_steps >= length {
            vec![Segment::new(1, length as f64)]
        } else if healthy_steps == 0 {
            vec![Segment::new(2, length as f64)]
        } else {
            vec![
                Segment::new(1, healthy_steps as f64),
                Segment::new(2, (length - healthy_steps) as f64),
            ]
        };
        Cycle::new(segments).expect("maintenance cycle is well formed")
    }
}

impl CycleModel for DiscreteMaintenanceModel {
    fn time_kind(&self) -> TimeKind {
        TimeKind::Discrete
    }

    fn max_length(&self) -> Option<f64> {
        Some((self.period + self.jitter) as f64)
    }

    fn draw(&self, rng: &mut StreamRng) -> Cycle {
        let length = rng.random_range(self.period - self.jitter..=self.period + self.jitter);
        let healthy = Geometric::new(self.failure_prob)
            .expect("validated probability")
            .sample(rng);
        self.cycle_from_draws(length, healthy)
    }
}

/// Cycles drawn from an explicit finite list.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSupportModel {
    time_kind: TimeKind,
    outcomes: Vec<(f64, Cycle)>,
    cumulative: Vec<f64>,
}

impl FiniteSupportModel {
    pub fn new(time_kind: TimeKind, outcomes: Vec<(f64, Cycle)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidParameter(
                "finite-support model needs at least one cycle".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(outcomes.len());
        let mut acc = 0.0;
        for (i, (p, c)) in outcomes.iter().enumerate() {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "cycle {i} has invalid probability {p}"
                )));
            }
            if time_kind == TimeKind::Discrete && !c.is_integral() {
                return Err(Error::InvalidParameter(format!(
                    "cycle {i} has non-integer durations in a discrete-time model"
                )));
            }
            acc += p;
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "cycle probabilities sum to {acc}, expected 1"
            )));
        }
        Ok(Self {
            time_kind,
            outcomes,
            cumulative,
        })
    }

    pub fn outcomes(&self) -> &[(f64, Cycle)] {
        &self.outcomes
    }
}

impl CycleModel for FiniteSupportModel {
    fn time_kind(&self) -> TimeKind {
        self.time_kind
    }

    fn max_length(&self) -> Option<f64> {
        Some(
            self.outcomes
                .iter()
                .map(|(_, c)| c.length())
                .fold(0.0, f64::max),
        )
    }

    fn draw(&self, rng: &mut StreamRng) -> Cycle {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.outcomes.len() - 1);
        self.outcomes[idx].1.clone()
    }
}

/// Deterministic switching: every cycle is the same.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicModel {
    time_kind: TimeKind,
    cycle: Cycle,
}

impl PeriodicModel {
    pub fn new(time_kind: TimeKind, cycle: Cycle) -> Result<Self> {
        if time_kind == TimeKind::Discrete && !cycle.is_integral() {
            return Err(Error::InvalidParameter(
                "periodic discrete-time cycle needs integer durations".into(),
            ));
        }
        Ok(Self { time_kind, cycle })
    }

    pub fn cycle(&self) -> &Cycle {
        &self.cycle
    }
}

impl CycleModel for PeriodicModel {
    fn time_kind(&self) -> TimeKind {
        self.time_kind
    }

    fn max_length(&self) -> Option<f64> {
        Some(self.cycle.length())
    }

    fn draw(&self, _rng: &mut StreamRng) -> Cycle {
        self.cycle.clone()
    }
}

/// Fixed cycle length; mode 1 for a uniformly distributed time
/// `h ∈ [hold_min, hold_max]`, then mode 2 for the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSwitchModel {
    hold_min: f64,
    hold_max: f64,
    length: f64,
}

impl UniformSwitchModel {
    pub fn new(hold_min: f64, hold_max: f64, length: f64) -> Result<Self> {
        if !(hold_min.is_finite() && hold_max.is_finite() && length.is_finite())
            || hold_min <= 0.0
            || hold_min > hold_max
            || hold_max > length
        {
            return Err(Error::InvalidParameter(format!(
                "need 0 < hold_min <= hold_max <= length, got {hold_min}, {hold_max}, {length}"
            )));
        }
        Ok(Self {
            hold_min,
            hold_max,
            length,
        })
    }

    /// Hold time uniform on `[t, t + 1]`, cycle length `t + 1`.
    pub fn unit_window(t: f64) -> Result<Self> {
        Self::new(t, t + 1.0, t + 1.0)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cycle_from_hold(&self, h: f64) -> Cycle {
        let segments = if h >= self.length {
            vec![Segment::new(1, self.length)]
        } else {
            vec![Segment::new(1, h), Segment::new(2, self.length - h)]
        };
        Cycle::with_length(self.length, segments).expect("switch cycle is well formed")
    }
}

impl CycleModel for UniformSwitchModel {
    fn time_kind(&self) -> TimeKind {
        TimeKind::Continuous
    }

    fn max_length(&self) -> Option<f64> {
        Some(self.length)
    }

    fn draw(&self, rng: &mut StreamRng) -> Cycle {
        let h = if self.hold_max > self.hold_min {
            rng.random_range(self.hold_min..=self.hold_max)
        } else {
            self.hold_min
        };
        self.cycle_from_hold(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regen::{sample_cycle, RngSeed};
    use proptest::prelude::*;

    #[test]
    fn maintenance_validation() {
        assert!(MaintenanceModel::new(1.0, 0.1, 1.0).is_ok());
        assert!(MaintenanceModel::new(0.0, 0.1, 1.0).is_err());
        assert!(MaintenanceModel::new(1.0, 1.5, 1.0).is_err());
        assert!(MaintenanceModel::new(1.0, 1.0, 1.0).is_err());
        assert!(MaintenanceModel::new(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn maintenance_deterministic_draws() {
        let m = MaintenanceModel::new(1.0, 0.0, 1.0).unwrap();
        let c = m.cycle_from_draws(0.0, 5.0);
        assert_eq!(c.segments(), &[Segment::new(1, 1.0)]);
        let c = m.cycle_from_draws(0.0, 0.3);
        assert_eq!(c.segments()[0], Segment::new(1, 0.3));
        assert_eq!(c.segments()[1].mode, 2);
        assert!((c.segments()[1].duration - 0.7).abs() < 1e-15);
        let c = m.cycle_from_draws(0.0, 0.0);
        assert_eq!(c.segments(), &[Segment::new(2, 1.0)]);
    }

    #[test]
    fn maintenance_rare_failures_give_single_segment() {
        let m = MaintenanceModel::new(1.0, 0.0, 1e-12).unwrap();
        let mut rng = RngSeed::new(3).rng();
        for _ in 0..1000 {
            let c = sample_cycle(&m, &mut rng).unwrap();
            assert_eq!(c.segments(), &[Segment::new(1, 1.0)]);
        }
    }

    #[test]
    fn maintenance_failure_probability() {
        // P(failure within cycle) = 1 - E[exp(-λR)], R ~ U[0.9T, 1.1T].
        let t = 1.25;
        let m = MaintenanceModel::new(t, 0.1, 1.0).unwrap();
        let p = 1.0 - ((-0.9 * t).exp() - (-1.1 * t).exp()) / (0.2 * t);
        let n = 1_000_000;
        let mut rng = RngSeed::new(99).rng();
        let hits = (0..n).filter(|_| m.draw(&mut rng).has_mode(2)).count();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let phat = hits as f64 / n as f64;
        assert!((phat - p).abs() < 3.0 * se, "phat {phat} p {p} se {se}");
    }

    #[test]
    fn maintenance_mean_length() {
        let t = 2.0;
        let m = MaintenanceModel::new(t, 0.1, 1.0).unwrap();
        let n = 200_000;
        let mut rng = RngSeed::new(5).rng();
        let mean = (0..n).map(|_| m.draw(&mut rng).length()).sum::<f64>() / n as f64;
        // Uniform on width 0.4T has sd 0.4T / sqrt(12).
        let se = 0.4 * t / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - t).abs() < 3.0 * se);
    }

    #[test]
    fn maintenance_survival_given_length() {
        // Condition on narrow bins of R; survival should be exp(-λ r).
        let m = MaintenanceModel::new(1.0, 0.5, 0.8).unwrap();
        let mut rng = RngSeed::new(6).rng();
        let bins = 10;
        let (lo, hi) = m.length_range();
        let mut total = vec![0usize; bins];
        let mut survived = vec![0usize; bins];
        for _ in 0..400_000 {
            let c = m.draw(&mut rng);
            let b = (((c.length() - lo) / (hi - lo)) * bins as f64).min(bins as f64 - 1.0) as usize;
            total[b] += 1;
            if !c.has_mode(2) {
                survived[b] += 1;
            }
        }
        for b in 0..bins {
            let r = lo + (b as f64 + 0.5) * (hi - lo) / bins as f64;
            let p = (-0.8 * r).exp();
            let n = total[b] as f64;
            let se = (p * (1.0 - p) / n).sqrt();
            // Bin width adds a small bias on top of sampling error.
            let bias = 0.8 * p * (hi - lo) / bins as f64 / 2.0;
            assert!(((survived[b] as f64 / n) - p).abs() < 3.0 * se + bias);
        }
    }

    #[test]
    fn finite_support_frequencies() {
        let a = Cycle::new(vec![Segment::new(1, 1.0)]).unwrap();
        let b = Cycle::new(vec![Segment::new(2, 2.0)]).unwrap();
        let model = FiniteSupportModel::new(TimeKind::Continuous, vec![(0.3, a), (0.7, b)]).unwrap();
        let n = 100_000;
        let mut rng = RngSeed::new(8).rng();
        let count_a = (0..n)
            .filter(|_| sample_cycle(&model, &mut rng).unwrap().has_mode(1))
            .count();
        let se = (0.3f64 * 0.7 / n as f64).sqrt();
        assert!((count_a as f64 / n as f64 - 0.3).abs() < 3.0 * se);
        assert_eq!(model.max_length(), Some(2.0));
    }

    #[test]
    fn finite_support_validation() {
        let a = Cycle::new(vec![Segment::new(1, 1.5)]).unwrap();
        assert!(FiniteSupportModel::new(TimeKind::Continuous, vec![(0.5, a.clone())]).is_err());
        assert!(FiniteSupportModel::new(TimeKind::Discrete, vec![(1.0, a)]).is_err());
        assert!(FiniteSupportModel::new(TimeKind::Continuous, vec![]).is_err());
    }

    #[test]
    fn periodic_is_constant() {
        let c = Cycle::new(vec![Segment::new(1, 0.5), Segment::new(2, 0.25)]).unwrap();
        let model = PeriodicModel::new(TimeKind::Continuous, c.clone()).unwrap();
        let mut rng = RngSeed::new(1).rng();
        for _ in 0..10 {
            assert_eq!(sample_cycle(&model, &mut rng).unwrap(), c);
        }
    }

    #[test]
    fn unit_window_cycles_have_fixed_length() {
        let model = UniformSwitchModel::unit_window(3.0).unwrap();
        let mut rng = RngSeed::new(2).rng();
        for _ in 0..1000 {
            let c = sample_cycle(&model, &mut rng).unwrap();
            assert_eq!(c.length(), 4.0);
            assert_eq!(c.segments()[0].mode, 1);
            assert!(c.segments()[0].duration >= 3.0);
        }
    }

    #[test]
    fn discrete_maintenance_cycles() {
        let model = DiscreteMaintenanceModel::new(5, 2, 0.2).unwrap();
        let mut rng = RngSeed::new(4).rng();
        for _ in 0..2000 {
            let c = sample_cycle(&model, &mut rng).unwrap();
            assert!(c.is_integral());
            assert!((3.0..=7.0).contains(&c.length()));
            assert_eq!(c.segments()[0].mode == 2, c.segments().len() == 1 && c.has_mode(2));
        }
        assert!(DiscreteMaintenanceModel::new(3, 3, 0.5).is_err());
        assert_eq!(model.cycle_from_draws(4, 1).segments().len(), 2);
    }

    proptest! {
        #[test]
        fn maintenance_segments_sum_to_length(seed in any::<u64>(), t in 0.1f64..5.0, d in 0.0f64..0.9, lam in 0.01f64..10.0) {
            let m = MaintenanceModel::new(t, d, lam).unwrap();
            let mut rng = RngSeed::new(seed).rng();
            for _ in 0..20 {
                let c = sample_cycle(&m, &mut rng).unwrap();
                let sum: f64 = c.segments().iter().map(|s| s.duration).sum();
                prop_assert!(c.segments().iter().all(|s| s.duration > 0.0));
                prop_assert!((sum - c.length()).abs() <= f64::EPSILON * c.length());
                prop_assert!(c.length() <= m.length_range().1);
            }
        }
    }
}
